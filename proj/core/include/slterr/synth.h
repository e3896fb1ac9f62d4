#ifndef SLTERR_SYNTH_H_
#define SLTERR_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "slterr/corpus.h"

namespace slterr {

// Synthetic quintuplets over a fixed toy lexicon. Source word sNNN translates
// to tNNN; every word with NNN % 7 == 3 is "hard" and, at mt_error_rate per
// occurrence, comes out as the mistranslation mNNN. ASR noise words nNN
// translate to uNN. The lexicon does not depend on the seed.
struct SynthConfig {
  std::size_t utterances = 200;
  std::size_t min_length = 5;
  std::size_t max_length = 15;
  std::size_t vocabulary = 200;
  std::size_t noise_vocabulary = 40;
  double asr_substitution_rate = 0.08;
  double asr_insertion_rate = 0.03;
  double mt_error_rate = 0.5;
  std::uint64_t seed = 1;
};

struct SynthCorpus {
  Corpus corpus;
  std::vector<std::vector<double>> confidence;  // per f_hyp token
};

SynthCorpus Synthesize(const SynthConfig& config);

// The five corpus files plus f_hyp.conf.
void SaveSynthCorpus(const std::filesystem::path& dir, const SynthCorpus& synth);

}  // namespace slterr

#endif  // SLTERR_SYNTH_H_
