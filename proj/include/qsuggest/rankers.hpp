#pragma once

/// Ranker construction by id: rdp, rdp-noneg, nb, car, freq, alpha.

#include <memory>
#include <string>

#include "qsuggest/baselines.hpp"
#include "qsuggest/rdp.hpp"

namespace qsuggest {

struct RankerSpec {
  std::string id = "rdp";
  RdpConfig rdp;
  std::size_t car_min_support = 1;
  double car_min_confidence = 0.0;
};

inline std::unique_ptr<EdgeRanker> make_ranker(RankerSpec const& spec, QueryLog const& log) {
  if (spec.id == "rdp" || spec.id == "rdp-noneg") {
    auto cfg = spec.rdp;
    cfg.include_negatives = spec.id == "rdp";
    return std::make_unique<RdpRanker>(log, cfg);
  }
  if (spec.id == "nb") return std::make_unique<NbRanker>(nb_train(log));
  if (spec.id == "car")
    return std::make_unique<CarRanker>(car_train(log, spec.car_min_support, spec.car_min_confidence));
  if (spec.id == "freq") return std::make_unique<FrequencyRanker>(log);
  if (spec.id == "alpha") return std::make_unique<AlphabeticalRanker>();
  throw InvalidArgument("unknown ranker '" + spec.id + "' (expected rdp, rdp-noneg, nb, car, freq, alpha)");
}

}  // namespace qsuggest
