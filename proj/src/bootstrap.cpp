#include "dvar/bootstrap.hpp"

#include "dvar/csv.hpp"
#include "dvar/error.hpp"
#include "dvar/parallel.hpp"
#include "dvar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

namespace dvar {

void validate(const BlockPlan& plan, Eigen::Index periods) {
  if (plan.block_length < 1 || plan.block_length > periods)
    throw PlanError("block length " + std::to_string(plan.block_length) + " must be in [1, T = " +
                    std::to_string(periods) + "]");
  if (plan.replications < 1) throw PlanError("need at least one replication");
  if (!(plan.level > 0.0 && plan.level < 1.0)) throw PlanError("level must be in (0, 1)");
  if (!(plan.max_failed_fraction >= 0.0 && plan.max_failed_fraction <= 1.0))
    throw PlanError("max failed fraction must be in [0, 1]");
}

std::vector<Eigen::Index> block_indices(Eigen::Index periods, Eigen::Index block_length, std::uint64_t seed) {
  if (block_length < 1 || block_length > periods)
    throw PlanError("block length " + std::to_string(block_length) + " must be in [1, T = " +
                    std::to_string(periods) + "]");
  const Eigen::Index starts = periods - block_length + 1;
  const Eigen::Index blocks = (periods + block_length - 1) / block_length;
  const KeyedUniform uniforms(seed);
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(blocks * block_length));
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const double u = uniforms(static_cast<std::uint64_t>(b), stream::auxiliary);
    const Eigen::Index start = std::min(starts - 1, static_cast<Eigen::Index>(u * static_cast<double>(starts)));
    for (Eigen::Index k = 0; k < block_length; ++k) rows.push_back(start + k);
  }
  rows.resize(static_cast<std::size_t>(periods));
  return rows;
}

SeriesPanel moving_block_resample(const SeriesPanel& panel, Eigen::Index block_length, std::uint64_t seed) {
  const auto rows = block_indices(panel.periods(), block_length, seed);
  Eigen::MatrixXd values(panel.periods(), panel.variables());
  std::vector<Period> dates;
  const Period first = panel.dates().front();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values.row(static_cast<Eigen::Index>(i)) = panel.values().row(rows[i]);
    dates.push_back({first.freq, first.index + static_cast<std::int64_t>(i) * first.step()});
  }
  return SeriesPanel(std::move(dates), std::move(values), panel.names(), panel.frequency());
}

double interpolated_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ShapeError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BandResult bootstrap_bands(const SeriesPanel& panel, const PanelStatistic& statistic, const BlockPlan& plan) {
  validate(plan, panel.periods());
  BandResult out;
  out.estimate = statistic(panel);
  const Eigen::Index k = out.estimate.size();
  const auto B = static_cast<std::size_t>(plan.replications);

  std::vector<std::optional<Eigen::VectorXd>> reps(B);
  std::vector<std::string> errors(B);
  parallel_for(B, resolve_threads(plan.threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      try {
        Eigen::VectorXd v = statistic(moving_block_resample(panel, plan.block_length, derive_seed(plan.seed, b)));
        if (v.size() != k)
          errors[b] = "statistic returned " + std::to_string(v.size()) + " values, expected " + std::to_string(k);
        else if (!v.allFinite())
          errors[b] = "statistic returned non-finite values";
        else
          reps[b] = std::move(v);
      } catch (const std::exception& e) {
        errors[b] = e.what();
      }
    }
  });

  std::vector<const Eigen::VectorXd*> ok;
  for (std::size_t b = 0; b < B; ++b) {
    if (reps[b]) {
      ok.push_back(&*reps[b]);
    } else {
      ++out.failed;
      if (out.failures.size() < 5) out.failures.push_back("replication " + std::to_string(b) + ": " + errors[b]);
    }
  }
  out.replications = static_cast<int>(ok.size());
  if (ok.empty() || static_cast<double>(out.failed) > plan.max_failed_fraction * static_cast<double>(B)) {
    std::string msg = std::to_string(out.failed) + " of " + std::to_string(B) + " replications failed";
    if (!out.failures.empty()) msg += " (" + out.failures.front() + ")";
    throw BootstrapQualityError(msg);
  }

  out.lower.resize(k);
  out.upper.resize(k);
  std::vector<double> col(ok.size());
  for (Eigen::Index c = 0; c < k; ++c) {
    for (std::size_t b = 0; b < ok.size(); ++b) col[b] = (*ok[b])(c);
    out.lower(c) = interpolated_quantile(col, (1.0 - plan.level) / 2.0);
    out.upper(c) = interpolated_quantile(col, (1.0 + plan.level) / 2.0);
  }
  return out;
}

void write_bands(std::ostream& out, const std::vector<std::string>& coordinates, const BandResult& bands) {
  csv::write_row(out, {"coordinate", "point", "lower", "upper"});
  for (Eigen::Index c = 0; c < bands.estimate.size(); ++c) {
    const auto i = static_cast<std::size_t>(c);
    csv::write_row(out, {i < coordinates.size() ? coordinates[i] : std::to_string(c), csv::format(bands.estimate(c)),
                         csv::format(bands.lower(c)), csv::format(bands.upper(c))});
  }
}

}  // namespace dvar
