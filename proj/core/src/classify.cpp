#include "lfptd/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lfptd/density.hpp"
#include "lfptd/stats.hpp"
#include "numeric.hpp"

namespace lfptd {

namespace {

void require_pair(const SessionRecord& pre, const SessionRecord& post) {
  if (pre.subject_id() != post.subject_id()) throw Error("pre and post records belong to different subjects");
  if (pre.phase() != Phase::Pre || post.phase() != Phase::Post) throw Error("expected a PRE and a POST record");
}

double midpoint_between(double below_max, double above_min, const char* what) {
  if (!(below_max < above_min)) {
    throw Error(std::string("score ranges overlap for ") + what);
  }
  return 0.5 * (below_max + above_min);
}

}  // namespace

void Thresholds::validate() const {
  if (!(hip_kld_t > 0.0 && nac_kld_t > 0.0 && food_2d > 0.0 && morphine_2d > 0.0 && corr_band > 0.0)) {
    throw Error("thresholds must be positive");
  }
  if (!(morphine_2d < food_2d)) throw Error("morphine_2d must be below food_2d");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Corr:
      return "CORR";
    case Method::Kld1d:
      return "KLD1D";
    case Method::Kld2d:
      return "KLD2D";
  }
  return "CORR";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Saline:
      return "SALINE";
    case Verdict::Morphine:
      return "MORPHINE";
    case Verdict::Food:
      return "FOOD";
    case Verdict::NotFood:
      return "NOT_FOOD";
  }
  return "SALINE";
}

Verdict to_verdict(Treatment treatment) {
  switch (treatment) {
    case Treatment::Saline:
      return Verdict::Saline;
    case Treatment::Morphine:
      return Verdict::Morphine;
    case Treatment::Food:
      return Verdict::Food;
  }
  return Verdict::Saline;
}

bool verdict_matches(Method method, Verdict verdict, Treatment truth) {
  if (method == Method::Corr) {
    return (verdict == Verdict::Food) == (truth == Treatment::Food);
  }
  return verdict == to_verdict(truth);
}

std::string_view to_string(VarianceDirection direction) {
  switch (direction) {
    case VarianceDirection::Increased:
      return "INCREASED";
    case VarianceDirection::Decreased:
      return "DECREASED";
    case VarianceDirection::Unchanged:
      return "UNCHANGED";
  }
  return "UNCHANGED";
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson needs equal lengths");
  if (x.size() < 2) throw Error("pearson needs at least two samples");
  const double mx = detail::mean(x);
  const double my = detail::mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double kld1d_score(const Signal& pre, const Signal& post, const Kld1dOptions& options) {
  if (pre.fs() != post.fs()) throw Error("sampling rates differ");
  const auto pre_w = window(pre, options.window_seconds);
  const auto post_w = window(post, options.window_seconds);
  const std::size_t count = std::min(pre_w.size(), post_w.size());
  double total = 0.0;
  for (std::size_t w = 0; w < count; ++w) {
    const auto range = shared_range(pre_w[w].samples(), post_w[w].samples());
    const auto p = hist_pdf(pre_w[w], options.bins, range);
    const auto q = hist_pdf(post_w[w], options.bins, range);
    total += jsd_discrete(p, q);
  }
  return total;
}

double kld2d_score(const SessionRecord& pre, const SessionRecord& post) {
  const std::vector<std::vector<double>> pre_cols{pre.hip().values(), pre.nac().values()};
  const std::vector<std::vector<double>> post_cols{post.hip().values(), post.nac().values()};
  return kld_gauss_nd(fit_gauss_nd(pre_cols), fit_gauss_nd(post_cols));
}

ClassificationResult decide_correlation(double r_post, const Thresholds& th) {
  ClassificationResult res;
  res.method = Method::Corr;
  res.scores["r_post"] = r_post;
  res.predicted = r_post > th.corr_band ? Verdict::Food : Verdict::NotFood;
  return res;
}

ClassificationResult decide_kld1d(double k_hip, double k_nac, const Thresholds& th) {
  ClassificationResult res;
  res.method = Method::Kld1d;
  res.scores["k_hip_bits"] = k_hip;
  res.scores["k_nac_bits"] = k_nac;
  const bool hip_high = k_hip > th.hip_kld_t;
  const bool nac_high = k_nac > th.nac_kld_t;
  if (hip_high && nac_high) {
    res.ambiguous = true;
    res.predicted = k_hip / th.hip_kld_t >= k_nac / th.nac_kld_t ? Verdict::Food : Verdict::Morphine;
  } else if (hip_high) {
    res.predicted = Verdict::Food;
  } else if (nac_high) {
    res.predicted = Verdict::Morphine;
  } else {
    res.predicted = Verdict::Saline;
  }
  return res;
}

ClassificationResult decide_kld2d(double k, const Thresholds& th) {
  ClassificationResult res;
  res.method = Method::Kld2d;
  res.scores["k_2d_nats"] = k;
  if (k > th.food_2d) {
    res.predicted = Verdict::Food;
  } else if (k > th.morphine_2d) {
    res.predicted = Verdict::Morphine;
  } else {
    res.predicted = Verdict::Saline;
  }
  return res;
}

ClassificationResult classify_by_correlation(const SessionRecord& pre, const SessionRecord& post,
                                             const Thresholds& th) {
  require_pair(pre, post);
  auto res = decide_correlation(pearson(post.hip(), post.nac()), th);
  res.scores["r_pre"] = pearson(pre.hip(), pre.nac());
  return res;
}

ClassificationResult classify_by_kld1d(const SessionRecord& pre, const SessionRecord& post, const Thresholds& th,
                                       const Kld1dOptions& options) {
  require_pair(pre, post);
  return decide_kld1d(kld1d_score(pre.hip(), post.hip(), options), kld1d_score(pre.nac(), post.nac(), options), th);
}

ClassificationResult classify_by_kld2d(const SessionRecord& pre, const SessionRecord& post, const Thresholds& th) {
  require_pair(pre, post);
  return decide_kld2d(kld2d_score(pre, post), th);
}

VarianceComparison compare_variance(const Signal& pre, const Signal& post, double window_seconds) {
  const auto pre_w = window(pre, window_seconds);
  const auto post_w = window(post, window_seconds);
  if (pre_w.size() < 3 || post_w.size() < 3) throw Error("compare_variance needs at least 3 windows per signal");

  std::vector<double> pre_sigma, post_sigma;
  for (const auto& w : pre_w) pre_sigma.push_back(fit_gauss1d(w).sigma);
  for (const auto& w : post_w) post_sigma.push_back(fit_gauss1d(w).sigma);

  const double diff = detail::mean(post_sigma) - detail::mean(pre_sigma);
  if (diff == 0.0) return {VarianceDirection::Unchanged, 1.0};

  const auto alt = diff > 0.0 ? Alternative::Greater : Alternative::Less;
  const auto res = t_test(post_sigma, pre_sigma, {.paired = false, .alternative = alt, .equal_variance = false});
  VarianceComparison out;
  out.p_value = res.p_value;
  if (res.p_value < 0.05) {
    out.direction = diff > 0.0 ? VarianceDirection::Increased : VarianceDirection::Decreased;
  }
  return out;
}

SubjectScores score_subject(const SessionRecord& pre, const SessionRecord& post, const Kld1dOptions& options) {
  require_pair(pre, post);
  SubjectScores s;
  s.r_pre = pearson(pre.hip(), pre.nac());
  s.r_post = pearson(post.hip(), post.nac());
  s.k_hip = kld1d_score(pre.hip(), post.hip(), options);
  s.k_nac = kld1d_score(pre.nac(), post.nac(), options);
  s.k_2d = kld2d_score(pre, post);
  return s;
}

Thresholds calibrate(const std::vector<LabeledScores>& cohort) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  struct Range {
    double lo = kInf;
    double hi = -kInf;
    bool any = false;
    void add(double v) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      any = true;
    }
  };
  Range r_food, r_other, hip_food, hip_other, nac_morph, nac_other, k2_food, k2_morph, k2_saline;
  for (const auto& [truth, s] : cohort) {
    if (truth == Treatment::Food) {
      r_food.add(s.r_post);
      hip_food.add(s.k_hip);
      nac_other.add(s.k_nac);
      k2_food.add(s.k_2d);
    } else {
      r_other.add(s.r_post);
      hip_other.add(s.k_hip);
      if (truth == Treatment::Morphine) {
        nac_morph.add(s.k_nac);
        k2_morph.add(s.k_2d);
      } else {
        nac_other.add(s.k_nac);
        k2_saline.add(s.k_2d);
      }
    }
  }
  if (!(r_food.any && nac_morph.any && k2_saline.any)) {
    throw Error("calibration needs at least one subject of each treatment");
  }

  Thresholds th;
  th.corr_band = midpoint_between(r_other.hi, r_food.lo, "corr");
  th.hip_kld_t = midpoint_between(hip_other.hi, hip_food.lo, "hip kld1d");
  th.nac_kld_t = midpoint_between(nac_other.hi, nac_morph.lo, "nac kld1d");
  th.food_2d = midpoint_between(k2_morph.hi, k2_food.lo, "food kld2d");
  th.morphine_2d = midpoint_between(k2_saline.hi, k2_morph.lo, "morphine kld2d");
  th.validate();
  return th;
}

}  // namespace lfptd
