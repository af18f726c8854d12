#include "dvar/design.hpp"

#include "dvar/error.hpp"

#include <algorithm>
#include <numeric>

namespace dvar {

std::vector<int> DesignSpec::identity_ordering(int variables) {
  std::vector<int> o(static_cast<std::size_t>(variables));
  std::iota(o.begin(), o.end(), 0);
  return o;
}

void validate(const DesignSpec& spec, int variables) {
  if (spec.lags < 1) throw SpecError("lags must be >= 1");
  if (spec.horizon < 0) throw SpecError("horizon must be >= 0");
  if (static_cast<int>(spec.ordering.size()) != variables)
    throw SpecError("ordering has " + std::to_string(spec.ordering.size()) + " entries for " +
                    std::to_string(variables) + " variables");
  std::vector<bool> seen(static_cast<std::size_t>(variables), false);
  for (int v : spec.ordering) {
    if (v < 0 || v >= variables || seen[static_cast<std::size_t>(v)])
      throw SpecError("ordering is not a permutation of the variables");
    seen[static_cast<std::size_t>(v)] = true;
  }
}

Eigen::VectorXd conditioning_block(const SeriesPanel& panel, Eigen::Index t, const DesignSpec& spec) {
  const auto J = panel.variables();
  const Eigen::Index oldest = t - spec.first_lag() - (spec.lags - 1);
  const Eigen::Index newest = t - spec.first_lag();
  if (oldest < 0 || newest >= panel.periods())
    throw InsufficientDataError("conditioning block for row " + std::to_string(t) + " needs rows " +
                                std::to_string(oldest) + ".." + std::to_string(newest));
  Eigen::VectorXd z(J * spec.lags);
  for (int l = 0; l < spec.lags; ++l) z.segment(l * J, J) = panel.values().row(newest - l).transpose();
  return z;
}

Eigen::VectorXd raw_covariates(const Eigen::VectorXd& block, const Eigen::VectorXd& contemporaneous) {
  Eigen::VectorXd x(1 + block.size() + contemporaneous.size());
  x(0) = 1.0;
  x.segment(1, block.size()) = block;
  x.tail(contemporaneous.size()) = contemporaneous;
  return x;
}

DesignSet build_design(const SeriesPanel& panel, const DesignSpec& spec) {
  const int J = static_cast<int>(panel.variables());
  validate(spec, J);
  const Eigen::Index T = panel.periods();
  if (T <= spec.lags + spec.horizon)
    throw InsufficientDataError("need more than p + h = " + std::to_string(spec.lags + spec.horizon) +
                                " periods, have " + std::to_string(T));

  const Eigen::Index first = spec.lags - 1 + spec.first_lag();
  const Eigen::Index last = T - 1 - spec.horizon;
  DesignSet out;
  out.spec = spec;
  for (Eigen::Index t = first; t <= last; ++t) out.origin_rows.push_back(t);
  const Eigen::Index n = out.rows();
  const int k = spec.block_size(J);

  Eigen::MatrixXd block(n, k);
  for (Eigen::Index r = 0; r < n; ++r)
    block.row(r) = conditioning_block(panel, out.origin_rows[static_cast<std::size_t>(r)], spec).transpose();

  for (int pos = 0; pos < J; ++pos) {
    VariableDesign vd;
    vd.variable = spec.ordering[static_cast<std::size_t>(pos)];
    vd.response.resize(n);
    vd.covariates.resize(n, spec.raw_dimension(J, pos));
    vd.covariates.col(0).setOnes();
    vd.covariates.middleCols(1, k) = block;
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index target = out.origin_rows[static_cast<std::size_t>(r)] + spec.horizon;
      vd.response(r) = panel.values()(target, vd.variable);
      if (spec.include_contemporaneous)
        for (int q = 0; q < pos; ++q)
          vd.covariates(r, 1 + k + q) = panel.values()(target, spec.ordering[static_cast<std::size_t>(q)]);
    }
    out.variables.push_back(std::move(vd));
  }
  return out;
}

}  // namespace dvar
