#include "dvar/counterfactual.hpp"

#include "dvar/error.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dvar {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double min_mass = 1e-12;

// Inverse CDF of a continuous law truncated to [lo, hi], inverting in the
// tail where the CDF keeps precision.
template <class Dist>
double truncated_quantile(const Dist& dist, double lo, double hi, double u) {
  namespace bm = boost::math;
  const double plo = bm::cdf(dist, lo);
  double x;
  if (plo < 0.5) {
    const double phi = bm::cdf(dist, hi);
    x = bm::quantile(dist, std::clamp(plo + u * (phi - plo), plo, phi));
  } else {
    const double qlo = bm::cdf(bm::complement(dist, lo));
    const double qhi = bm::cdf(bm::complement(dist, hi));
    x = bm::quantile(bm::complement(dist, std::clamp(qlo - u * (qlo - qhi), qhi, qlo)));
  }
  return std::clamp(x, lo, hi);
}

template <class Dist>
double truncated_mass(const Dist& dist, double lo, double hi) {
  namespace bm = boost::math;
  const double plo = bm::cdf(dist, lo);
  return plo < 0.5 ? bm::cdf(dist, hi) - plo
                   : bm::cdf(bm::complement(dist, lo)) - bm::cdf(bm::complement(dist, hi));
}

}  // namespace

void validate(const CounterfactualSpec& spec) {
  if (spec.target < 0) throw SpecError("counterfactual target must be a variable index");
  std::visit(overloaded{
                 [](const PointMass& p) {
                   if (!std::isfinite(p.value)) throw SpecError("point mass value must be finite");
                 },
                 [](const TruncatedNormal& n) {
                   if (!(n.lo < n.hi)) throw SpecError("truncated normal needs lo < hi");
                   if (!(n.sigma > 0) || !std::isfinite(n.mu)) throw SpecError("truncated normal needs sigma > 0");
                   if (truncated_mass(boost::math::normal_distribution<>(n.mu, n.sigma), n.lo, n.hi) < min_mass)
                     throw SpecError("truncated normal has no mass inside [lo, hi]");
                 },
                 [](const TruncatedGamma& g) {
                   if (!(g.lo < g.hi)) throw SpecError("truncated gamma needs lo < hi");
                   if (!(g.shape > 0) || !(g.scale > 0)) throw SpecError("truncated gamma needs shape, scale > 0");
                   if (g.lo < 0) throw SpecError("truncated gamma support must lie in [0, inf)");
                   if (truncated_mass(boost::math::gamma_distribution<>(g.shape, g.scale), g.lo, g.hi) < min_mass)
                     throw SpecError("truncated gamma has no mass inside [lo, hi]");
                 },
                 [](const CdfTable& t) {
                   if (t.points.empty() || t.points.size() != t.cdf.size())
                     throw SpecError("CDF table needs matching, nonempty points and values");
                   for (std::size_t i = 0; i < t.points.size(); ++i) {
                     if (!(t.cdf[i] >= 0.0 && t.cdf[i] <= 1.0)) throw SpecError("CDF table values must be in [0, 1]");
                     if (i > 0 && !(t.points[i] > t.points[i - 1]))
                       throw SpecError("CDF table points must be strictly increasing");
                     if (i > 0 && t.cdf[i] < t.cdf[i - 1]) throw SpecError("CDF table must be nondecreasing");
                   }
                 },
             },
             spec.law);
}

std::pair<double, double> support(const CounterfactualLaw& law) {
  return std::visit(overloaded{
                        [](const PointMass& p) { return std::pair{p.value, p.value}; },
                        [](const TruncatedNormal& n) { return std::pair{n.lo, n.hi}; },
                        [](const TruncatedGamma& g) { return std::pair{g.lo, g.hi}; },
                        [](const CdfTable& t) { return std::pair{t.points.front(), t.points.back()}; },
                    },
                    law);
}

void check_support(const CounterfactualSpec& spec, double observed_lo, double observed_hi) {
  const auto [lo, hi] = support(spec.law);
  if (lo < observed_lo || hi > observed_hi) {
    std::ostringstream msg;
    msg << "counterfactual support [" << lo << ", " << hi << "] is not inside the observed support ["
        << observed_lo << ", " << observed_hi << "]";
    throw SpecError(msg.str());
  }
}

double counterfactual_quantile(const CounterfactualLaw& law, double u) {
  return std::visit(overloaded{
                        [](const PointMass& p) { return p.value; },
                        [u](const TruncatedNormal& n) {
                          return truncated_quantile(boost::math::normal_distribution<>(n.mu, n.sigma), n.lo, n.hi, u);
                        },
                        [u](const TruncatedGamma& g) {
                          return truncated_quantile(boost::math::gamma_distribution<>(g.shape, g.scale), g.lo, g.hi,
                                                    u);
                        },
                        [u](const CdfTable& t) {
                          const auto it = std::lower_bound(t.cdf.begin(), t.cdf.end(), u);
                          return it == t.cdf.end() ? t.points.back()
                                                   : t.points[static_cast<std::size_t>(it - t.cdf.begin())];
                        },
                    },
                    law);
}

std::string describe(const CounterfactualLaw& law) {
  std::ostringstream s;
  std::visit(overloaded{
                 [&](const PointMass& p) { s << "point_mass{value=" << p.value << "}"; },
                 [&](const TruncatedNormal& n) {
                   s << "truncated_normal{mu=" << n.mu << ", sigma=" << n.sigma << ", lo=" << n.lo << ", hi=" << n.hi
                     << "}";
                 },
                 [&](const TruncatedGamma& g) {
                   s << "truncated_gamma{shape=" << g.shape << ", scale=" << g.scale << ", lo=" << g.lo
                     << ", hi=" << g.hi << "}";
                 },
                 [&](const CdfTable& t) { s << "table{" << t.points.size() << " points}"; },
             },
             law);
  return s.str();
}

Eigen::VectorXd sample_counterfactual_marginal(const CounterfactualSpec& spec, Eigen::Index draws, std::uint64_t seed) {
  validate(spec);
  if (draws < 1) throw ShapeError("need at least one draw");
  const KeyedUniform uniforms(seed);
  Eigen::VectorXd out(draws);
  for (Eigen::Index s = 0; s < draws; ++s)
    out(s) = counterfactual_quantile(
        spec.law, uniforms(static_cast<std::uint64_t>(s), stream::marginal_draw + static_cast<std::uint64_t>(spec.target)));
  return out;
}

CdfTable table_from_marginal(const FactorizedJointModel& model, int variable, const Eigen::VectorXd& x) {
  const auto& m = model.marginals[static_cast<std::size_t>(model.position_of(variable))];
  const Eigen::VectorXd table = m.cdf_table(x);
  return CdfTable{m.grid().points(), std::vector<double>(table.data(), table.data() + table.size())};
}

JointSample sample_counterfactual_joint(const FactorizedJointModel& base, const CounterfactualSpec& spec,
                                        const Eigen::VectorXd& z, Eigen::Index draws, std::uint64_t seed,
                                        unsigned threads) {
  validate(spec);
  if (spec.target >= base.variables())
    throw SpecError("counterfactual target " + std::to_string(spec.target) + " exceeds J = " +
                    std::to_string(base.variables()));
  const CoordinateOverride law{spec.target, [&spec](double u) { return counterfactual_quantile(spec.law, u); }};
  SamplingOptions opt;
  opt.threads = threads;
  opt.override_law = &law;
  JointSample out;
  out.draws = draw_factorized(base, z.transpose(), draws, KeyedUniform(seed), opt);
  out.seed = seed;
  out.z = z;
  out.names = base.names;
  return out;
}

JointSample counterfactual_forecast(const HorizonSuite& suite, const CounterfactualSpec& spec, int h,
                                    const Eigen::VectorXd& z, Eigen::Index draws, std::uint64_t seed,
                                    unsigned threads) {
  if (h < 0) throw MissingHorizonError("negative horizon");
  if (h > 0) (void)suite.horizon(h);
  JointSample cf = sample_counterfactual_joint(suite.base, spec, z, draws, seed, threads);
  if (h == 0) return cf;
  cf.draws = compose_horizon(suite, h, cf.draws, z, seed, threads);
  return cf;
}

}  // namespace dvar
