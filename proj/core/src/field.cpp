#include "driftx/field.hpp"

#include <cmath>
#include <map>
#include <string>

#include "driftx/error.hpp"
#include "driftx/parallel.hpp"

namespace driftx {
namespace {

void require_mask_alignment(const Matrix& queries, const Matrix& support) {
  if (queries.rows() != support.rows() || queries != support) {
    throw Error(ErrorCode::InvalidArgument, "self-masking requires the support to be the query set itself");
  }
  if (queries.rows() < 2) {
    throw Error(ErrorCode::Infeasible, "self-masked repulsion needs at least two samples");
  }
}

Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = m.row(rows[k]);
  return out;
}

// Attraction path: rows are accumulated on the fly, nothing B x N is stored.
KernelMean streamed_kernel_mean(const Matrix& queries, const Matrix& support, double tau, double epsilon) {
  if (queries.cols() != support.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "queries and support differ in dimension");
  }
  if (support.rows() == 0) throw Error(ErrorCode::InvalidArgument, "kernel mean over an empty support");
  detail::require_positive_tau(tau);
  const Index dim = queries.cols();
  KernelMean out{Matrix::Zero(queries.rows(), dim), Vector::Zero(queries.rows())};
  parallel_for(queries.rows(), [&](Index begin, Index end) {
    for (Index b = begin; b < end; ++b) {
      const double* x = queries.row(b).data();
      auto numer = out.mean.row(b);
      double mass = 0.0;
      for (Index j = 0; j < support.rows(); ++j) {
        const double* y = support.row(j).data();
        const double w = detail::laplace(x, y, dim, tau);
        mass += w;
        for (Index k = 0; k < dim; ++k) numer(k) += w * y[k];
      }
      out.mass(b) = mass;
      numer /= mass + epsilon;
    }
  }, 4);
  return out;
}

struct UnitResult {
  KernelMean attract;
  KernelMean repel;
};

// One conditioning unit: the whole batch, or the queries of one class.
struct UnitSupport {
  const Matrix* positives = nullptr;
  const ShardedSummaryBank* bank = nullptr;
  std::optional<std::size_t> shard;
  const Matrix* negatives = nullptr;
};

UnitResult evaluate_unit(const Matrix& queries, const UnitSupport& support, double tau,
                         const DriftFieldConfig& config, bool mask_self, MemoryLedger* ledger) {
  UnitResult out;
  if (config.attraction == Estimator::Exact) {
    out.attract = streamed_kernel_mean(queries, *support.positives, tau, config.epsilon);
  } else {
    auto acc = compose_shards_batch(*support.bank, queries, ledger, support.shard);
    out.attract.mean = projected_mean(acc, config.epsilon);
    out.attract.mass = std::move(acc.denominators);
  }
  if (support.negatives == nullptr) {
    // No repulsion: V = mu_p(x) - x.
    out.repel.mean = queries;
    out.repel.mass = Vector::Zero(queries.rows());
  } else if (config.repulsion == Estimator::Exact) {
    out.repel = exact_kernel_mean(queries, *support.negatives, tau, config.epsilon, mask_self, ledger);
  } else {
    out.repel = projected_repulsive_mean(queries, *support.negatives, *support.bank, config.epsilon, mask_self,
                                         support.shard);
  }
  return out;
}

}  // namespace

std::string_view to_string(Estimator e) { return e == Estimator::Exact ? "exact" : "projected"; }

Estimator parse_estimator(std::string_view name) {
  if (name == "exact") return Estimator::Exact;
  if (name == "projected") return Estimator::Projected;
  throw Error(ErrorCode::InvalidArgument, "unknown estimator '" + std::string(name) + "'");
}

void DriftFieldConfig::validate() const {
  kernel.validate();
  if (!std::isfinite(epsilon) || epsilon <= 0.0) throw Error(ErrorCode::InvalidArgument, "epsilon must be > 0");
  if (!std::isfinite(epsilon_norm) || epsilon_norm <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "epsilon_norm must be > 0");
  }
}

KernelMean exact_kernel_mean(const Matrix& queries, const Matrix& support, double tau, double epsilon,
                             bool mask_self, MemoryLedger* ledger) {
  if (queries.cols() != support.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "queries and support differ in dimension");
  }
  if (mask_self) require_mask_alignment(queries, support);
  Matrix k = kernel_matrix(queries, support, tau);
  if (mask_self) k.diagonal().setZero();
  if (ledger) ledger->repulsion_bytes = sizeof(double) * static_cast<std::size_t>(k.size());
  KernelMean out;
  out.mass = k.rowwise().sum();
  out.mean = (out.mass.array() + epsilon).inverse().matrix().asDiagonal() * (k * support);
  return out;
}

Matrix exact_attractive_mean(const FeatureSet& queries, const FeatureSet& positives, double tau,
                             double epsilon) {
  return streamed_kernel_mean(queries.points(), positives.points(), tau, epsilon).mean;
}

Matrix exact_repulsive_mean(const FeatureSet& queries, const FeatureSet& negatives, double tau,
                            double epsilon, bool mask_self) {
  return exact_kernel_mean(queries.points(), negatives.points(), tau, epsilon, mask_self).mean;
}

Matrix projected_attractive_mean(const FeatureSet& queries, const ShardedSummaryBank& bank,
                                 Conditioning conditioning, std::span<const int> query_labels) {
  if (conditioning == Conditioning::Unconditional) {
    return projected_mean(compose_shards_batch(bank, queries.points()), bank.epsilon());
  }
  if (static_cast<Index>(query_labels.size()) != queries.size()) {
    throw Error(ErrorCode::InvalidArgument, "per-class conditioning needs one label per query");
  }
  Matrix out(queries.size(), queries.dim());
  std::map<int, std::vector<Index>> by_class;
  for (std::size_t b = 0; b < query_labels.size(); ++b) by_class[query_labels[b]].push_back(static_cast<Index>(b));
  for (const auto& [cls, rows] : by_class) {
    const auto shard = bank.shard_for_class(cls);
    if (!shard) throw Error(ErrorCode::MissingShard, "no summary shard for class " + std::to_string(cls));
    const Matrix mean = projected_mean(compose_shards_batch(bank, gather_rows(queries.points(), rows), nullptr, shard),
                                       bank.epsilon());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(rows[k]) = mean.row(static_cast<Index>(k));
  }
  return out;
}

KernelMean projected_repulsive_mean(const Matrix& queries, const Matrix& negatives,
                                    const ShardedSummaryBank& bases, double epsilon, bool mask_self,
                                    std::optional<std::size_t> only_shard) {
  if (queries.cols() != bases.dim() || negatives.cols() != bases.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "queries, negatives and bases differ in dimension");
  }
  if (mask_self) require_mask_alignment(queries, negatives);
  const Index batch = queries.rows();
  Matrix numer = Matrix::Zero(batch, queries.cols());
  Vector denom = Vector::Zero(batch);
  Vector self_weight = Vector::Zero(batch);
  for (std::size_t s = 0; s < bases.size(); ++s) {
    if (only_shard && s != *only_shard) continue;
    const NystromBasis& basis = bases.shards()[s].basis;
    const Matrix phi_neg = basis.feature_matrix(negatives);
    const Matrix a = phi_neg.transpose() * negatives;
    const Vector b = phi_neg.transpose() * Vector::Ones(negatives.rows());
    const Matrix phi_q = mask_self ? phi_neg : basis.feature_matrix(queries);
    numer.noalias() += phi_q * a;
    denom.noalias() += phi_q * b;
    if (mask_self) self_weight += phi_q.rowwise().squaredNorm();
  }
  if (mask_self) {
    numer -= self_weight.asDiagonal() * negatives;
    denom -= self_weight;
  }
  KernelMean out;
  out.mass = denom;
  out.mean = (denom.array() + epsilon).inverse().matrix().asDiagonal() * numer;
  return out;
}

FieldEvaluation drift_field(const FeatureSet& queries, const FieldInputs& inputs,
                            const DriftFieldConfig& config) {
  config.validate();
  const std::size_t groups = config.kernel.groups();
  const Index batch = queries.size();
  const Index dim = queries.dim();

  if (config.attraction == Estimator::Exact) {
    if (!inputs.positives) throw Error(ErrorCode::InvalidArgument, "exact attraction needs positives");
    if (inputs.positives->dim() != dim) throw Error(ErrorCode::DimensionMismatch, "positives vs queries");
  }
  const bool needs_banks =
      config.attraction == Estimator::Projected || (inputs.negatives && config.repulsion == Estimator::Projected);
  if (needs_banks) {
    if (inputs.banks.size() != groups) {
      throw Error(ErrorCode::InvalidArgument, "projected estimators need one summary bank per temperature group");
    }
    for (std::size_t g = 0; g < groups; ++g) {
      if (inputs.banks[g].dim() != dim) throw Error(ErrorCode::DimensionMismatch, "bank vs queries");
      for (const auto& shard : inputs.banks[g].shards()) {
        if (shard.basis.tau() != config.kernel.temperatures[g]) {
          throw Error(ErrorCode::BasisMismatch, "bank " + std::to_string(g) + " was built at tau=" +
                                                    std::to_string(shard.basis.tau()));
        }
      }
    }
  }
  if (inputs.negatives && inputs.negatives->dim() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "negatives vs queries");
  }

  // Conditioning units: row lists into the batch with their supports.
  struct Unit {
    std::vector<Index> rows;
    Matrix positives;
    Matrix negatives;
    int cls = -1;
  };
  std::vector<Unit> units;
  const bool per_class = config.conditioning == Conditioning::PerClass;
  if (!per_class) {
    Unit all;
    all.rows.resize(static_cast<std::size_t>(batch));
    for (Index b = 0; b < batch; ++b) all.rows[static_cast<std::size_t>(b)] = b;
    units.push_back(std::move(all));
  } else {
    if (static_cast<Index>(inputs.query_labels.size()) != batch) {
      throw Error(ErrorCode::InvalidArgument, "per-class conditioning needs one label per query");
    }
    std::map<int, std::vector<Index>> by_class;
    for (Index b = 0; b < batch; ++b) by_class[inputs.query_labels[static_cast<std::size_t>(b)]].push_back(b);
    for (auto& [cls, rows] : by_class) {
      Unit u;
      u.cls = cls;
      u.rows = std::move(rows);
      if (config.attraction == Estimator::Exact) {
        if (!inputs.positives->has_labels()) {
          throw Error(ErrorCode::InvalidArgument, "per-class exact attraction needs labelled positives");
        }
        const auto members = inputs.positives->indices_of_class(cls);
        if (members.empty()) throw Error(ErrorCode::MissingShard, "no positives for class " + std::to_string(cls));
        u.positives = gather_rows(inputs.positives->points(), members);
      }
      if (inputs.negatives) {
        if (inputs.mask_self) {
          u.negatives = gather_rows(inputs.negatives->points(), u.rows);
        } else {
          if (!inputs.negatives->has_labels()) {
            throw Error(ErrorCode::InvalidArgument, "per-class repulsion needs labelled negatives");
          }
          const auto members = inputs.negatives->indices_of_class(cls);
          if (members.empty()) {
            throw Error(ErrorCode::MissingShard, "no negatives for class " + std::to_string(cls));
          }
          u.negatives = gather_rows(inputs.negatives->points(), members);
        }
      }
      units.push_back(std::move(u));
    }
  }

  FieldEvaluation out;
  out.attract_mass.resize(batch, static_cast<Index>(groups));
  out.repel_mass.resize(batch, static_cast<Index>(groups));
  std::vector<Matrix> attract(groups, Matrix(batch, dim));
  std::vector<Matrix> repel(groups, Matrix(batch, dim));

  for (std::size_t g = 0; g < groups; ++g) {
    const double tau = config.kernel.temperatures[g];
    const ShardedSummaryBank* bank = needs_banks ? &inputs.banks[g] : nullptr;
    for (const Unit& unit : units) {
      UnitSupport support;
      support.bank = bank;
      Matrix unit_queries;
      const Matrix* q = &queries.points();
      if (per_class) {
        unit_queries = gather_rows(queries.points(), unit.rows);
        q = &unit_queries;
        if (config.attraction == Estimator::Exact) support.positives = &unit.positives;
        if (inputs.negatives) support.negatives = &unit.negatives;
        if (bank) {
          support.shard = bank->shard_for_class(unit.cls);
          if (!support.shard) throw Error(ErrorCode::MissingShard, "no summary shard for class " + std::to_string(unit.cls));
        }
      } else {
        if (inputs.positives) support.positives = &inputs.positives->points();
        if (inputs.negatives) support.negatives = &inputs.negatives->points();
      }
      UnitResult r = evaluate_unit(*q, support, tau, config, inputs.mask_self, per_class ? nullptr : inputs.ledger);
      for (std::size_t k = 0; k < unit.rows.size(); ++k) {
        const Index b = unit.rows[k];
        const auto kk = static_cast<Index>(k);
        attract[g].row(b) = r.attract.mean.row(kk);
        repel[g].row(b) = r.repel.mean.row(kk);
        out.attract_mass(b, static_cast<Index>(g)) = r.attract.mass(kk);
        out.repel_mass(b, static_cast<Index>(g)) = r.repel.mass(kk);
      }
    }
  }

  if (groups == 1) {
    out.mu_attract = std::move(attract[0]);
    out.mu_repel = std::move(repel[0]);
  } else {
    out.mu_attract = Matrix::Zero(batch, dim);
    out.mu_repel = Matrix::Zero(batch, dim);
    for (std::size_t g = 0; g < groups; ++g) {
      const Vector norms = (attract[g] - repel[g]).rowwise().norm();
      const Vector scale = config.kernel.group_weights[g] * (norms.array() + config.epsilon_norm).inverse();
      out.mu_attract.noalias() += scale.asDiagonal() * attract[g];
      out.mu_repel.noalias() += scale.asDiagonal() * repel[g];
    }
  }
  out.drift = out.mu_attract - out.mu_repel;
  if (!out.drift.allFinite()) throw Error(ErrorCode::NonFinite, "drift field is not finite");
  return out;
}

Matrix drift_targets(const Matrix& queries, const FieldEvaluation& field) {
  if (queries.rows() != field.drift.rows() || queries.cols() != field.drift.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "queries and field shapes differ");
  }
  return queries + field.drift;
}

}  // namespace driftx
