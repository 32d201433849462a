// Copyright (c) 2026 crossvox project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line driver for the crossvox pipeline. One subcommand per stage;
// every run echoes the resolved configuration and the effective seed so a
// log line is enough to reproduce it.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crossvox/checkpoint.h"
#include "crossvox/codebook.h"
#include "crossvox/common.h"
#include "crossvox/config.h"
#include "crossvox/corpus.h"
#include "crossvox/dsp.h"
#include "crossvox/encoders.h"
#include "crossvox/evaluation.h"
#include "crossvox/kernels.h"
#include "crossvox/perturb.h"
#include "crossvox/pipeline.h"
#include "crossvox/training.h"
#include "crossvox/txt2vec.h"
#include "crossvox/vec2wav.h"
#include "crossvox/wav.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace crossvox;

namespace {

void require_file(const std::string& path, const std::string& what) {
  if (!fs::exists(path))
    throw MissingArtifactError(what + " not found: " + path +
                               " (run the producing stage first)");
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string manifest_path(const config::GlobalConfig& cfg) {
  return cfg.paths.corpus_dir + "/manifest.tsv";
}

std::string pairs_path(const config::GlobalConfig& cfg) {
  return cfg.paths.perturb_dir + "/pairs.tsv";
}

// Accepts "3,17,5" as well as "3 17 5".
std::vector<int> parse_phonemes(const std::string& text, int vocab) {
  std::string normalized = text;
  for (char& c : normalized)
    if (c == ',') c = ' ';
  std::istringstream in(normalized);
  std::vector<int> ids;
  int id = 0;
  while (in >> id) {
    if (id < 0 || id >= vocab)
      throw ConfigError("phoneme id " + std::to_string(id) +
                        " outside vocabulary [0, " + std::to_string(vocab) + ")");
    ids.push_back(id);
  }
  if (!in.eof())
    throw ConfigError("cannot parse phoneme list '" + text + "'");
  if (ids.empty()) throw ConfigError("empty phoneme list");
  return ids;
}

encoders::ClassifierEncoder load_encoder(const std::string& path,
                                         const std::string& what) {
  require_file(path, what);
  return encoders::ClassifierEncoder(load_checkpoint(path));
}

std::vector<training::UtteranceFeatures> load_features(
    const config::GlobalConfig& cfg, const codebook::Codebook& cb,
    const encoders::ClassifierEncoder* emotion_enc) {
  require_file(manifest_path(cfg), "corpus manifest");
  require_file(pairs_path(cfg), "perturbation pairs file");
  return training::prepare_features(manifest_path(cfg), pairs_path(cfg), cb,
                                    emotion_enc);
}

int cmd_gen_corpus(const config::GlobalConfig& cfg) {
  const auto records = corpus::generate_corpus(
      cfg.corpus, cfg.paths.corpus_dir, derive_seed(cfg.seed, "corpus"));
  std::printf("wrote %zu utterances to %s\n", records.size(),
              cfg.paths.corpus_dir.c_str());
  return 0;
}

int cmd_perturb(const config::GlobalConfig& cfg) {
  require_file(manifest_path(cfg), "corpus manifest");
  const auto pairs =
      perturb::perturb_corpus(manifest_path(cfg), cfg.paths.perturb_dir,
                              cfg.perturbation, derive_seed(cfg.seed, "perturb"));
  std::printf("wrote %zu perturbed pairs to %s\n", pairs.size(),
              cfg.paths.perturb_dir.c_str());
  return 0;
}

int cmd_fit_codebook(const config::GlobalConfig& cfg) {
  require_file(manifest_path(cfg), "corpus manifest");
  require_file(pairs_path(cfg), "perturbation pairs file");
  const nn::Mat feats = training::collect_unit_features(
      manifest_path(cfg), pairs_path(cfg), cfg.codebook.max_frames_per_utt,
      cfg.n_mels);
  const codebook::Codebook cb =
      codebook::fit_codebook(feats, cfg.codebook.k,
                             derive_seed(cfg.seed, "codebook"),
                             cfg.codebook.restarts, cfg.codebook.max_iters);
  ensure_parent_dir(cfg.paths.codebook);
  codebook::save_codebook(cfg.paths.codebook, cb, cfg.seed,
                          config::global_config_json(cfg));
  std::printf("fit codebook k=%d dim=%d inertia=%.6f -> %s\n", cb.k(), cb.dim(),
              cb.inertia, cfg.paths.codebook.c_str());
  return 0;
}

int cmd_train_encoders(const config::GlobalConfig& cfg) {
  require_file(manifest_path(cfg), "corpus manifest");
  const struct {
    const char* name;
    training::LabelKind label;
    int num_classes;
    const std::string* out_path;
  } jobs[] = {
      {"speaker_encoder", training::LabelKind::kSpeaker,
       cfg.corpus.num_speakers, &cfg.paths.speaker_encoder},
      {"emotion_encoder", training::LabelKind::kEmotion,
       cfg.corpus.num_emotions, &cfg.paths.emotion_encoder},
  };
  for (const auto& job : jobs) {
    const auto data =
        training::labeled_mels(manifest_path(cfg), "", job.label,
                               training::AudioStream::kClean, cfg.n_mels);
    encoders::EncoderConfig ecfg = cfg.encoder;
    ecfg.num_classes = job.num_classes;
    ecfg.seed = derive_seed(cfg.seed, job.name);
    encoders::ClassifierEncoder enc(ecfg);
    const double acc = encoders::train_encoder(enc, data, ecfg);
    ensure_parent_dir(*job.out_path);
    save_checkpoint(*job.out_path, enc.to_checkpoint(job.name));
    std::printf("%s: train accuracy %.4f -> %s\n", job.name, acc,
                job.out_path->c_str());
  }
  return 0;
}

int cmd_train_txt2vec(const config::GlobalConfig& cfg,
                      const std::string& resume) {
  require_file(cfg.paths.codebook, "unit codebook");
  const codebook::Codebook cb = codebook::load_codebook(cfg.paths.codebook);
  const auto feats = load_features(cfg, cb, nullptr);
  std::vector<txt2vec::Txt2VecItem> items;
  items.reserve(feats.size());
  for (const auto& f : feats) items.push_back(training::to_txt2vec_item(f));

  txt2vec::Txt2VecModel model(cfg.txt2vec_model);
  ensure_parent_dir(cfg.paths.txt2vec);
  const std::string log_path = cfg.paths.work_dir + "/txt2vec_train.jsonl";
  ensure_parent_dir(log_path);
  if (!resume.empty()) require_file(resume, "resume checkpoint");
  const auto result = training::train_txt2vec(model, items, cfg.txt2vec_train,
                                              log_path, cfg.paths.txt2vec,
                                              resume);
  std::printf("txt2vec: %zu steps, loss head %.6f -> tail %.6f, saved %s\n",
              result.log.size(), training::mean_total_head(result, 10),
              training::mean_total_tail(result, 10), cfg.paths.txt2vec.c_str());
  return 0;
}

int cmd_train_vec2wav(const config::GlobalConfig& cfg,
                      const std::string& resume) {
  require_file(cfg.paths.codebook, "unit codebook");
  const codebook::Codebook cb = codebook::load_codebook(cfg.paths.codebook);
  encoders::ClassifierEncoder emotion_enc =
      load_encoder(cfg.paths.emotion_encoder, "emotion encoder");
  encoders::ClassifierEncoder phi =
      load_encoder(cfg.paths.speaker_encoder, "speaker encoder");
  phi.freeze();

  const auto feats = load_features(cfg, cb, &emotion_enc);
  std::vector<vec2wav::Vec2WavItem> items;
  items.reserve(feats.size());
  for (const auto& f : feats) items.push_back(training::to_vec2wav_item(f));

  vec2wav::Vec2WavModel model(cfg.vec2wav_model);
  ensure_parent_dir(cfg.paths.vec2wav);
  const std::string log_path = cfg.paths.work_dir + "/vec2wav_train.jsonl";
  ensure_parent_dir(log_path);
  if (!resume.empty()) require_file(resume, "resume checkpoint");
  const auto result = training::train_vec2wav(model, items, &phi,
                                              cfg.vec2wav_train, log_path,
                                              cfg.paths.vec2wav, resume);
  std::printf("vec2wav: %zu steps, loss head %.6f -> tail %.6f, saved %s\n",
              result.log.size(), training::mean_total_head(result, 10),
              training::mean_total_tail(result, 10), cfg.paths.vec2wav.c_str());
  return 0;
}

struct SynthArgs {
  std::string phonemes;
  int language = 0;
  int speaker_id = 0;
  std::string emotion_ref;
  std::string style_ref;
  std::string out = "synth.wav";
};

int cmd_synth(const config::GlobalConfig& cfg, const SynthArgs& args) {
  require_file(cfg.paths.txt2vec, "txt2vec checkpoint");
  require_file(cfg.paths.vec2wav, "vec2wav checkpoint");
  require_file(args.emotion_ref, "emotion reference wav");
  if (args.speaker_id < 0 || args.speaker_id >= cfg.corpus.num_speakers)
    throw ConfigError("speaker id " + std::to_string(args.speaker_id) +
                      " outside [0, " +
                      std::to_string(cfg.corpus.num_speakers) + ")");
  if (args.language < 0 || args.language >= 2)
    throw ConfigError("language id must be 0 or 1");

  const txt2vec::Txt2VecModel t2v{load_checkpoint(cfg.paths.txt2vec)};
  const vec2wav::Vec2WavModel v2w{load_checkpoint(cfg.paths.vec2wav)};
  encoders::ClassifierEncoder emotion_enc =
      load_encoder(cfg.paths.emotion_encoder, "emotion encoder");

  pipeline::SynthInputs in;
  in.phonemes = parse_phonemes(args.phonemes, cfg.corpus.phoneme_vocab);
  in.language = args.language;
  in.speaker_id = args.speaker_id;
  in.emo_emb = emotion_enc.embed(load_wav(args.emotion_ref));

  const std::string style_path =
      args.style_ref.empty() ? args.emotion_ref : args.style_ref;
  require_file(style_path, "style reference wav");
  dsp::MelConfig mcfg;
  mcfg.n_fft = cfg.n_fft;
  mcfg.hop = cfg.hop;
  mcfg.win = cfg.win;
  mcfg.n_mels = cfg.n_mels;
  in.style_mel = dsp::mel_spectrogram(load_wav(style_path), mcfg);

  const pipeline::SynthResult result = pipeline::synthesize(t2v, v2w, in);
  ensure_parent_dir(args.out);
  save_wav(args.out, result.wav);
  std::printf("synthesized %zu samples (%.2f s) -> %s\n",
              result.wav.samples.size(),
              static_cast<double>(result.wav.samples.size()) /
                  result.wav.sample_rate,
              args.out.c_str());
  return 0;
}

int cmd_eval(const config::GlobalConfig& cfg, int cases) {
  if (cases < 1) throw ConfigError("--cases must be >= 1");
  require_file(cfg.paths.codebook, "unit codebook");
  require_file(cfg.paths.txt2vec, "txt2vec checkpoint");
  require_file(cfg.paths.vec2wav, "vec2wav checkpoint");
  const codebook::Codebook cb = codebook::load_codebook(cfg.paths.codebook);
  const txt2vec::Txt2VecModel t2v{load_checkpoint(cfg.paths.txt2vec)};
  const vec2wav::Vec2WavModel v2w{load_checkpoint(cfg.paths.vec2wav)};
  encoders::ClassifierEncoder speaker_enc =
      load_encoder(cfg.paths.speaker_encoder, "speaker encoder");
  encoders::ClassifierEncoder emotion_enc =
      load_encoder(cfg.paths.emotion_encoder, "emotion encoder");
  const auto feats = load_features(cfg, cb, &emotion_enc);

  evaluation::TransferConfig tcfg;
  tcfg.n_cases = cases;
  tcfg.seed = derive_seed(cfg.seed, "eval");

  evaluation::EvalReport report;
  report.corpus_id = "synthetic-" + std::to_string(cfg.corpus.num_speakers) +
                     "spk-" + std::to_string(cfg.corpus.num_emotions) + "emo";
  report.hardware = evaluation::hardware_descriptor();
  report.config_snapshot =
      nlohmann::json::parse(config::global_config_json(cfg)).dump();

  const struct {
    const char* group;
    bool cross;
  } groups[] = {{"cross", true}, {"same", false}};
  for (const auto& g : groups) {
    tcfg.cross_speaker = g.cross;
    const evaluation::TransferOutcome o = evaluation::transfer_eval(
        t2v, v2w, speaker_enc, emotion_enc, cb, feats, tcfg);
    std::printf(
        "%s: speaker_acc %.3f emotion_acc %.3f secs %.3f eecs %.3f "
        "uer %.2f%% rtf %.3f\n",
        g.group, o.speaker_acc, o.emotion_acc, o.mean_secs, o.mean_eecs,
        o.mean_uer * 100.0, o.rtf);
    evaluation::MetricRow row;
    row.system = "crossvox";
    row.speaker_group = g.group;
    row.language = "all";
    row.secs = o.mean_secs;
    row.eecs = o.mean_eecs;
    row.uer = o.mean_uer;
    row.rtf = o.rtf;
    report.rows.push_back(row);
  }

  fs::create_directories(cfg.paths.report_dir);
  const std::string tsv_path = cfg.paths.report_dir + "/metrics.tsv";
  const std::string md_path = cfg.paths.report_dir + "/metrics.md";
  evaluation::emit_report(report, evaluation::ReportFormat::kTsv, tsv_path);
  evaluation::emit_report(report, evaluation::ReportFormat::kMarkdown, md_path);
  std::printf("wrote %s and %s\n", tsv_path.c_str(), md_path.c_str());
  return 0;
}

int cmd_report(const std::string& input, const std::string& format,
               const std::string& out) {
  require_file(input, "metrics TSV");
  evaluation::ReportFormat fmt;
  if (format == "tsv") {
    fmt = evaluation::ReportFormat::kTsv;
  } else if (format == "markdown" || format == "md") {
    fmt = evaluation::ReportFormat::kMarkdown;
  } else {
    throw ConfigError("unknown report format '" + format +
                      "' (expected tsv or markdown)");
  }
  evaluation::EvalReport report;
  report.rows = evaluation::parse_report_tsv(slurp(input));
  ensure_parent_dir(out);
  evaluation::emit_report(report, fmt, out);
  std::printf("rendered %zu rows -> %s\n", report.rows.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crossvox: two-stage cross-lingual emotional speech synthesis"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file")
      ->required();
  uint64_t seed_override = 0;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_override, "override the master seed");
  int threads = 1;
  app.add_option("--threads", threads, "worker threads for parallel kernels")
      ->check(CLI::PositiveNumber);

  std::string work_dir, corpus_dir, perturb_dir, codebook_path;
  std::string speaker_enc_path, emotion_enc_path, txt2vec_path, vec2wav_path;
  std::string report_dir;
  CLI::Option* work_opt = app.add_option("--work-dir", work_dir);
  CLI::Option* corpus_opt = app.add_option("--corpus-dir", corpus_dir);
  CLI::Option* perturb_opt = app.add_option("--perturb-dir", perturb_dir);
  CLI::Option* codebook_opt = app.add_option("--codebook", codebook_path);
  CLI::Option* spk_opt = app.add_option("--speaker-encoder", speaker_enc_path);
  CLI::Option* emo_opt = app.add_option("--emotion-encoder", emotion_enc_path);
  CLI::Option* t2v_opt = app.add_option("--txt2vec", txt2vec_path);
  CLI::Option* v2w_opt = app.add_option("--vec2wav", vec2wav_path);
  CLI::Option* report_opt = app.add_option("--report-dir", report_dir);

  app.add_subcommand("gen-corpus", "synthesize the labeled corpus");
  app.add_subcommand("perturb", "write perturbed unit/emotion streams");
  app.add_subcommand("fit-codebook", "fit the discrete unit codebook");
  app.add_subcommand("train-encoders", "train speaker and emotion encoders");

  std::string t2v_resume, v2w_resume;
  CLI::App* sub_t2v =
      app.add_subcommand("train-txt2vec", "train the first-stage model");
  sub_t2v->add_option("--resume", t2v_resume, "checkpoint to resume from");
  CLI::App* sub_v2w =
      app.add_subcommand("train-vec2wav", "train the second-stage model");
  sub_v2w->add_option("--resume", v2w_resume, "checkpoint to resume from");

  SynthArgs synth_args;
  CLI::App* sub_synth = app.add_subcommand("synth", "synthesize one utterance");
  sub_synth->add_option("--phonemes", synth_args.phonemes,
                        "phoneme ids, e.g. '3,17,5'")
      ->required();
  sub_synth->add_option("--language", synth_args.language, "language id");
  sub_synth->add_option("--speaker-id", synth_args.speaker_id,
                        "target speaker id");
  sub_synth->add_option("--emotion-ref", synth_args.emotion_ref,
                        "reference wav for the emotion embedding")
      ->required();
  sub_synth->add_option("--style-ref", synth_args.style_ref,
                        "reference wav for prosody (defaults to --emotion-ref)");
  sub_synth->add_option("--out", synth_args.out, "output wav path");

  int eval_cases = 100;
  CLI::App* sub_eval =
      app.add_subcommand("eval", "run the emotion-transfer evaluation");
  sub_eval->add_option("--cases", eval_cases, "transfer cases per group");

  std::string report_input, report_format = "markdown", report_out;
  CLI::App* sub_report =
      app.add_subcommand("report", "re-render a metrics TSV");
  sub_report->add_option("--input", report_input, "metrics TSV file")
      ->required();
  sub_report->add_option("--format", report_format, "tsv or markdown");
  sub_report->add_option("--out", report_out, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    kernels::set_threads(threads);
    config::GlobalConfig cfg = config::load_global_config(config_path);
    if (seed_opt->count() > 0) cfg.seed = seed_override;
    if (work_opt->count() > 0) {
      cfg.paths.work_dir = work_dir;
      // Derived defaults follow the new root unless overridden explicitly.
      cfg.paths = config::GlobalConfig::Paths{};
      cfg.paths.work_dir = work_dir;
    }
    if (corpus_opt->count() > 0) cfg.paths.corpus_dir = corpus_dir;
    if (perturb_opt->count() > 0) cfg.paths.perturb_dir = perturb_dir;
    if (codebook_opt->count() > 0) cfg.paths.codebook = codebook_path;
    if (spk_opt->count() > 0) cfg.paths.speaker_encoder = speaker_enc_path;
    if (emo_opt->count() > 0) cfg.paths.emotion_encoder = emotion_enc_path;
    if (t2v_opt->count() > 0) cfg.paths.txt2vec = txt2vec_path;
    if (v2w_opt->count() > 0) cfg.paths.vec2wav = vec2wav_path;
    if (report_opt->count() > 0) cfg.paths.report_dir = report_dir;
    config::finalize_global_config(cfg);

    const std::string command = app.get_subcommands().front()->get_name();
    std::printf("crossvox %s | seed %llu | threads %d\n", command.c_str(),
                static_cast<unsigned long long>(cfg.seed), kernels::threads());
    std::printf("resolved config:\n%s\n", config::global_config_json(cfg).c_str());

    if (command == "gen-corpus") return cmd_gen_corpus(cfg);
    if (command == "perturb") return cmd_perturb(cfg);
    if (command == "fit-codebook") return cmd_fit_codebook(cfg);
    if (command == "train-encoders") return cmd_train_encoders(cfg);
    if (command == "train-txt2vec") return cmd_train_txt2vec(cfg, t2v_resume);
    if (command == "train-vec2wav") return cmd_train_vec2wav(cfg, v2w_resume);
    if (command == "synth") return cmd_synth(cfg, synth_args);
    if (command == "eval") return cmd_eval(cfg, eval_cases);
    if (command == "report")
      return cmd_report(report_input, report_format, report_out);
    throw Error("unhandled command " + command);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const MissingArtifactError& e) {
    std::fprintf(stderr, "missing artifact: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
