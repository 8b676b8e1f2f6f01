#pragma once

/// Baseline rankers: naive Bayes, class association rules, log frequency and
/// alphabetical order.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "qsuggest/query_log.hpp"
#include "qsuggest/ranker.hpp"

namespace qsuggest {

/// A session with t positive edges yields t instances: each positive edge in
/// turn is the class, and the remaining t-1 positives plus all negatives are
/// the attributes.
struct TrainingInstance {
  std::vector<SignedEdge> attributes;  // session order
  EdgeTypeId label;

  friend bool operator==(TrainingInstance const&, TrainingInstance const&) = default;
};

inline std::vector<TrainingInstance> training_instances(std::span<SignedEdge const> session) {
  std::vector<TrainingInstance> out;
  for (auto cls : session) {
    if (!cls.positive()) continue;
    TrainingInstance inst{{}, cls.etype};
    for (auto a : session)
      if (a != cls) inst.attributes.push_back(a);
    out.push_back(std::move(inst));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Naive Bayes

/// Multinomial naive Bayes over signed-edge attributes with additive
/// smoothing (alpha = 1).
class NbModel {
 public:
  static constexpr double kAlpha = 1.0;

  explicit NbModel(QueryLog const& log) {
    std::unordered_map<std::uint32_t, bool> vocabulary;
    for (SessionId s = 0; s < log.size(); ++s) {
      for (auto const& inst : training_instances(log.session(s))) {
        auto& cls = classes_[inst.label];
        ++cls.instances;
        ++instances_;
        for (auto a : inst.attributes) {
          ++cls.attribute_counts[a.key()];
          ++cls.attribute_total;
          vocabulary[a.key()] = true;
        }
      }
    }
    if (instances_ == 0) throw InvalidArgument("nb: query log has no positive edges");
    vocabulary_size_ = vocabulary.size();
  }

  std::size_t instance_count() const noexcept { return instances_; }
  std::size_t class_count() const noexcept { return classes_.size(); }
  std::size_t vocabulary_size() const noexcept { return vocabulary_size_; }

  /// log P(c) + Σ_{a ∈ Q} log P(a | c), smoothed; defined for unseen classes.
  double log_posterior(EdgeTypeId c, QuerySession const& session) const {
    auto const k = static_cast<double>(classes_.size());
    auto const v = static_cast<double>(std::max<std::size_t>(vocabulary_size_, 1));
    auto it = classes_.find(c);
    double const n_c = it == classes_.end() ? 0.0 : static_cast<double>(it->second.instances);
    double const total = it == classes_.end() ? 0.0 : static_cast<double>(it->second.attribute_total);
    double lp = std::log((n_c + kAlpha) / (static_cast<double>(instances_) + kAlpha * (k + 1)));
    for (auto a : session.edges()) {
      double count = 0.0;
      if (it != classes_.end()) {
        auto f = it->second.attribute_counts.find(a.key());
        if (f != it->second.attribute_counts.end()) count = static_cast<double>(f->second);
      }
      lp += std::log((count + kAlpha) / (total + kAlpha * v));
    }
    return lp;
  }

  /// Class table: class, instances, attribute, count.
  void write_tsv(std::ostream& out, EdgeTypeTable const& names) const {
    out << "# class\tinstances\tattribute\tcount\n";
    std::map<std::string, Class const*> ordered;
    for (auto const& [c, cls] : classes_) ordered.emplace(names.name(c), &cls);
    for (auto const& [name, cls] : ordered) {
      std::map<std::string, std::size_t> attrs;
      for (auto const& [key, count] : cls->attribute_counts)
        attrs.emplace(format_signed(SignedEdge::from_key(key), names), count);
      if (attrs.empty()) out << name << '\t' << cls->instances << "\t-\t0\n";
      for (auto const& [attr, count] : attrs)
        out << name << '\t' << cls->instances << '\t' << attr << '\t' << count << '\n';
    }
  }

 private:
  struct Class {
    std::size_t instances = 0;
    std::size_t attribute_total = 0;
    std::unordered_map<std::uint32_t, std::size_t> attribute_counts;
  };
  std::map<EdgeTypeId, Class> classes_;
  std::size_t instances_ = 0;
  std::size_t vocabulary_size_ = 0;
};

inline NbModel nb_train(QueryLog const& log) { return NbModel(log); }

/// Scores are posteriors normalized over the candidate set.
class NbRanker final : public EdgeRanker {
 public:
  explicit NbRanker(NbModel model) : model_(std::move(model)) {}
  std::string name() const override { return "nb"; }
  NbModel const& model() const noexcept { return model_; }

  std::vector<double> score(std::span<EdgeTypeId const> candidates, QuerySession const& session,
                            std::uint64_t) const override {
    std::vector<double> lp(candidates.size());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      lp[i] = model_.log_posterior(candidates[i], session);
      best = std::max(best, lp[i]);
    }
    double z = 0.0;
    for (auto& x : lp) z += (x = std::exp(x - best));
    for (auto& x : lp) x /= z;
    return lp;
  }

 private:
  NbModel model_;
};

// ---------------------------------------------------------------------------
// Class association rules

struct CarRule {
  std::vector<SignedEdge> antecedent;  // sorted by key
  EdgeTypeId consequent;
  std::size_t support = 0;  // sessions generating this exact rule
  double confidence = 0.0;  // count(antecedent ∪ {+consequent}) / count(antecedent)
};

/// Rules generated one per positive edge of every session, with identical
/// rules aggregated into a support count.
class CarRuleSet {
 public:
  CarRuleSet(QueryLog const& log, std::size_t min_support = 1, double min_confidence = 0.0) {
    std::map<std::pair<std::vector<std::uint32_t>, EdgeTypeId>, std::size_t> counts;
    for (SessionId s = 0; s < log.size(); ++s) {
      for (auto const& inst : training_instances(log.session(s))) {
        std::vector<std::uint32_t> keys;
        for (auto a : inst.attributes) keys.push_back(a.key());
        std::sort(keys.begin(), keys.end());
        ++counts[{std::move(keys), inst.label}];
      }
    }
    for (auto const& [key, support] : counts) {
      if (support < min_support) continue;
      CarRule rule;
      for (auto k : key.first) rule.antecedent.push_back(SignedEdge::from_key(k));
      rule.consequent = key.second;
      rule.support = support;
      auto const base = log.count(rule.antecedent);
      auto with = rule.antecedent;
      with.push_back(SignedEdge::pos(rule.consequent));
      rule.confidence = base == 0 ? 0.0 : static_cast<double>(log.count(with)) / static_cast<double>(base);
      if (rule.confidence < min_confidence || rule.confidence <= 0.0) continue;
      rules_.push_back(std::move(rule));
    }
    reindex();
  }

  std::span<CarRule const> rules() const noexcept { return rules_; }

  /// Multiplies every rule support by `factor`.
  void scale_supports(std::size_t factor) {
    for (auto& r : rules_) r.support *= factor;
    reindex();
  }

  /// Σ over rules with consequent c of
  ///   |antecedent ∩ Q| / |antecedent| × confidence × support / max support.
  double score(EdgeTypeId c, QuerySession const& session) const {
    double total = 0.0;
    for (auto e : session.edges()) {
      auto it = contributions_.find(e.key());
      if (it == contributions_.end()) continue;
      auto f = it->second.find(c);
      if (f != it->second.end()) total += f->second;
    }
    return total;
  }

  /// Rule table: antecedent (blank-separated), consequent, support, confidence.
  void write_tsv(std::ostream& out, EdgeTypeTable const& names) const {
    out << "# antecedent\tconsequent\tsupport\tconfidence\n";
    for (auto const& r : rules_) {
      for (std::size_t i = 0; i < r.antecedent.size(); ++i)
        out << (i ? " " : "") << format_signed(r.antecedent[i], names);
      out << '\t' << names.name(r.consequent) << '\t' << r.support << '\t' << r.confidence << '\n';
    }
  }

 private:
  void reindex() {
    contributions_.clear();
    std::size_t max_support = 0;
    for (auto const& r : rules_) max_support = std::max(max_support, r.support);
    for (auto const& r : rules_) {
      if (r.antecedent.empty()) continue;
      double const w = r.confidence * (static_cast<double>(r.support) / static_cast<double>(max_support)) /
                       static_cast<double>(r.antecedent.size());
      for (auto a : r.antecedent) contributions_[a.key()][r.consequent] += w;
    }
  }

  std::vector<CarRule> rules_;
  // signed edge key -> consequent -> summed per-overlap weight
  std::unordered_map<std::uint32_t, std::map<EdgeTypeId, double>> contributions_;
};

inline CarRuleSet car_train(QueryLog const& log, std::size_t min_support = 1, double min_confidence = 0.0) {
  return CarRuleSet(log, min_support, min_confidence);
}

class CarRanker final : public EdgeRanker {
 public:
  explicit CarRanker(CarRuleSet rules) : rules_(std::move(rules)) {}
  std::string name() const override { return "car"; }
  CarRuleSet const& rules() const noexcept { return rules_; }

  std::vector<double> score(std::span<EdgeTypeId const> candidates, QuerySession const& session,
                            std::uint64_t) const override {
    std::vector<double> out(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = rules_.score(candidates[i], session);
    return out;
  }

 private:
  CarRuleSet rules_;
};

// ---------------------------------------------------------------------------

/// Fraction of log sessions containing +e; ignores the session.
class FrequencyRanker final : public EdgeRanker {
 public:
  explicit FrequencyRanker(QueryLog const& log) : log_(&log) {}
  std::string name() const override { return "freq"; }

  std::vector<double> score(std::span<EdgeTypeId const> candidates, QuerySession const&,
                            std::uint64_t) const override {
    std::vector<double> out(candidates.size());
    auto const n = static_cast<double>(std::max<std::size_t>(log_->size(), 1));
    for (std::size_t i = 0; i < candidates.size(); ++i)
      out[i] = static_cast<double>(log_->posting(SignedEdge::pos(candidates[i])).size()) / n;
    return out;
  }

 private:
  QueryLog const* log_;
};

/// All scores 0, so the name tie-break yields alphabetical order.
class AlphabeticalRanker final : public EdgeRanker {
 public:
  std::string name() const override { return "alpha"; }
  std::vector<double> score(std::span<EdgeTypeId const> candidates, QuerySession const&,
                            std::uint64_t) const override {
    return std::vector<double>(candidates.size(), 0.0);
  }
};

}  // namespace qsuggest
