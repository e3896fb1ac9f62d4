#include "slterr/synth.h"

#include <cstdio>
#include <random>

#include "slterr/error.h"
#include "slterr/text_io.h"

namespace slterr {

namespace {

std::string Word(char prefix, std::size_t id, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, id);
  return buf;
}

bool IsHard(std::size_t id) { return id % 7 == 3; }

}  // namespace

SynthCorpus Synthesize(const SynthConfig& c) {
  if (c.vocabulary == 0 || c.noise_vocabulary == 0)
    throw Error("synth: vocabulary sizes must be positive");
  if (c.min_length > c.max_length) throw Error("synth: min_length > max_length");
  for (double r : {c.asr_substitution_rate, c.asr_insertion_rate, c.mt_error_rate})
    if (!(r >= 0.0 && r <= 1.0)) throw Error("synth: rates must be in [0,1]");

  std::mt19937_64 rng(c.seed);
  std::uniform_int_distribution<std::size_t> length(c.min_length, c.max_length);
  std::uniform_int_distribution<std::size_t> word(0, c.vocabulary - 1);
  std::uniform_int_distribution<std::size_t> noise(0, c.noise_vocabulary - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> low_conf(0.05, 0.35);
  std::uniform_real_distribution<double> high_conf(0.7, 1.0);

  SynthCorpus out;
  for (std::size_t u = 0; u < c.utterances; ++u) {
    Quintuplet q;
    q.utt_id = std::to_string(u);
    std::size_t n = length(rng);
    std::vector<std::size_t> ids(n);
    std::vector<bool> mistranslated(n);
    for (std::size_t i = 0; i < n; ++i) {
      ids[i] = word(rng);
      mistranslated[i] = IsHard(ids[i]) && unit(rng) < c.mt_error_rate;
      q.f_ref.push_back(Word('s', ids[i], 3));
      q.e_ref.push_back(Word('t', ids[i], 3));
      q.e_mt.push_back(Word(mistranslated[i] ? 'm' : 't', ids[i], 3));
    }
    std::vector<double> conf;
    auto noise_word = [&] {
      std::size_t k = noise(rng);
      q.f_hyp.push_back(Word('n', k, 2));
      q.e_slt.push_back(Word('u', k, 2));
      conf.push_back(low_conf(rng));
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (unit(rng) < c.asr_insertion_rate) noise_word();
      // Hard words are never misrecognized, so each SLT error has one cause.
      if (!IsHard(ids[i]) && unit(rng) < c.asr_substitution_rate) {
        noise_word();
        continue;
      }
      q.f_hyp.push_back(q.f_ref[i]);
      q.e_slt.push_back(q.e_mt[i]);
      conf.push_back(high_conf(rng));
    }
    out.corpus.push_back(std::move(q));
    out.confidence.push_back(std::move(conf));
  }
  return out;
}

void SaveSynthCorpus(const std::filesystem::path& dir, const SynthCorpus& synth) {
  SaveCorpus(dir, synth.corpus);
  std::string text;
  for (const auto& row : synth.confidence) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ' ';
      text += FormatFixed(row[i], 4);
    }
    text += '\n';
  }
  WriteFileAtomic(dir / "f_hyp.conf", text);
}

}  // namespace slterr
