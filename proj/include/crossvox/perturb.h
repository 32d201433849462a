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

#ifndef CROSSVOX_PERTURB_H_
#define CROSSVOX_PERTURB_H_

#include <cstdint>
#include <string>
#include <vector>

#include "crossvox/common.h"
#include "crossvox/corpus.h"

namespace crossvox::perturb {

enum class PerturbMethod { kFormantShift, kExternalAnonymizer };

struct PerturbationSpec {
  PerturbMethod method = PerturbMethod::kFormantShift;
  double shift_low = 1.0;
  double shift_high = 1.4;
  // When false, the R and E streams of perturb_dual draw independent factors.
  bool paired_streams = false;
};

void validate_spec(const PerturbationSpec& spec);

// Draws (s, s1) with s ~ U(low, high), s1 ~ U(0, 1) and returns s when
// s1 >= 0.5, otherwise 1/s. Factors land in [1/high, high] and are >= 1 with
// probability one half.
double factor_from_draws(double s, double s1);
double sample_factor(const PerturbationSpec& spec, Rng& rng);

struct PerturbResult {
  double factor = 1.0;
  double median_pitch = 0.0;
};

// Reads a wav, samples a shift factor from the per-file stream
// derive_seed(seed, stream_tag + ":" + utterance_id), scales the spectral
// envelope, and writes the result. Same seed and inputs give byte-identical
// output files.
PerturbResult perturb_file(const std::string& in_wav, const std::string& out_wav,
                           const PerturbationSpec& spec, uint64_t seed,
                           const std::string& utterance_id,
                           const std::string& stream_tag);

struct PairRecord {
  std::string utterance_id;
  std::string clean_path;
  std::string r_path;  // unit-stream input
  std::string e_path;  // emotion-stream input
  double r_factor = 1.0;
  double e_factor = 1.0;
};

// Writes out_dir/r/<id>.wav and out_dir/e/<id>.wav for every manifest record
// plus out_dir/pairs.tsv. The two streams use independent factor draws unless
// spec.paired_streams is set.
std::vector<PairRecord> perturb_corpus(const std::string& manifest_path,
                                       const std::string& out_dir,
                                       const PerturbationSpec& spec,
                                       uint64_t seed);

std::vector<PairRecord> read_pairs(const std::string& path);
void write_pairs(const std::string& path, const std::vector<PairRecord>& records);

}  // namespace crossvox::perturb

#endif  // CROSSVOX_PERTURB_H_
