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

#include "crossvox/perturb.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crossvox/dsp.h"
#include "crossvox/formant.h"
#include "crossvox/kernels.h"

namespace crossvox::perturb {

void validate_spec(const PerturbationSpec& spec) {
  if (spec.method == PerturbMethod::kExternalAnonymizer) {
    throw NotImplementedError(
        "external anonymizer backend requires a plug-in that is not bundled");
  }
  if (!(spec.shift_low >= 1.0 && spec.shift_low < spec.shift_high &&
        spec.shift_high <= 2.0)) {
    throw ConfigError("perturb: need 1 <= shift_low < shift_high <= 2");
  }
}

double factor_from_draws(double s, double s1) {
  return s1 >= 0.5 ? s : 1.0 / s;
}

double sample_factor(const PerturbationSpec& spec, Rng& rng) {
  const double s = rng.uniform(spec.shift_low, spec.shift_high);
  const double s1 = rng.uniform();
  return factor_from_draws(s, s1);
}

PerturbResult perturb_file(const std::string& in_wav, const std::string& out_wav,
                           const PerturbationSpec& spec, uint64_t seed,
                           const std::string& utterance_id,
                           const std::string& stream_tag) {
  validate_spec(spec);
  const Waveform wav = load_wav(in_wav);
  Rng rng(derive_seed(seed, stream_tag + ":" + utterance_id));
  PerturbResult res;
  res.factor = sample_factor(spec, rng);
  res.median_pitch = dsp::median_pitch(dsp::extract_pitch(wav));
  const Waveform shifted = dsp::change_formant(wav, res.factor, res.median_pitch);
  save_wav(out_wav, shifted);
  return res;
}

std::vector<PairRecord> perturb_corpus(const std::string& manifest_path,
                                       const std::string& out_dir,
                                       const PerturbationSpec& spec,
                                       uint64_t seed) {
  validate_spec(spec);
  const std::vector<corpus::ManifestRecord> records =
      corpus::read_manifest(manifest_path);
  if (records.empty()) throw MissingArtifactError("perturb: empty manifest");

  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  std::error_code ec;
  fs::create_directories(root / "r", ec);
  fs::create_directories(root / "e", ec);
  if (ec) throw IoError("perturb: cannot create output directories");

  std::vector<PairRecord> pairs(records.size());
  kernels::parallel_for(static_cast<int>(records.size()), kernels::threads(), [&](int i) {
    const corpus::ManifestRecord& rec = records[static_cast<size_t>(i)];
    const std::string clean = corpus::manifest_join(manifest_path, rec.wav_path);
    PairRecord pr;
    pr.utterance_id = rec.utterance_id;
    pr.clean_path = fs::relative(clean, root, ec).string();
    if (ec || pr.clean_path.empty()) pr.clean_path = fs::absolute(clean).string();
    pr.r_path = "r/" + rec.utterance_id + ".wav";
    pr.e_path = "e/" + rec.utterance_id + ".wav";
    pr.r_factor = perturb_file(clean, (root / pr.r_path).string(), spec, seed,
                               rec.utterance_id, "R")
                      .factor;
    if (spec.paired_streams) {
      std::error_code cec;
      fs::copy_file(root / pr.r_path, root / pr.e_path,
                    fs::copy_options::overwrite_existing, cec);
      if (cec) throw IoError("perturb: cannot copy paired stream for " + rec.utterance_id);
      pr.e_factor = pr.r_factor;
    } else {
      pr.e_factor = perturb_file(clean, (root / pr.e_path).string(), spec, seed,
                                 rec.utterance_id, "E")
                        .factor;
    }
    pairs[static_cast<size_t>(i)] = std::move(pr);
  });

  write_pairs((root / "pairs.tsv").string(), pairs);
  return pairs;
}

std::vector<PairRecord> read_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("pairs manifest not found: " + path);
  std::vector<PairRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream iss(line);
    PairRecord pr;
    std::string rf, ef;
    if (!std::getline(iss, pr.utterance_id, '\t') ||
        !std::getline(iss, pr.clean_path, '\t') ||
        !std::getline(iss, pr.r_path, '\t') ||
        !std::getline(iss, pr.e_path, '\t') || !std::getline(iss, rf, '\t') ||
        !std::getline(iss, ef)) {
      throw FormatError("pairs: expected 6 columns at line " + std::to_string(lineno));
    }
    try {
      pr.r_factor = std::stod(rf);
      pr.e_factor = std::stod(ef);
    } catch (const std::exception&) {
      throw FormatError("pairs: bad factor at line " + std::to_string(lineno));
    }
    out.push_back(std::move(pr));
  }
  return out;
}

void write_pairs(const std::string& path, const std::vector<PairRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("pairs: cannot write " + path);
  char buf[64];
  for (const PairRecord& pr : records) {
    out << pr.utterance_id << '\t' << pr.clean_path << '\t' << pr.r_path << '\t'
        << pr.e_path << '\t';
    std::snprintf(buf, sizeof(buf), "%.9f\t%.9f", pr.r_factor, pr.e_factor);
    out << buf << '\n';
  }
  if (!out) throw IoError("pairs: write failed for " + path);
}

}  // namespace crossvox::perturb
