#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Core>

#include "mmes/rng.hpp"

namespace mmes {

enum class ObjectiveKind { Sphere, Ellipsoid, Rosenbrock, Discus, Cigar, DiffPow };

inline const char* to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::Sphere: return "sphere";
    case ObjectiveKind::Ellipsoid: return "elli";
    case ObjectiveKind::Rosenbrock: return "rosen";
    case ObjectiveKind::Discus: return "discus";
    case ObjectiveKind::Cigar: return "cigar";
    case ObjectiveKind::DiffPow: return "diffpow";
  }
  return "?";
}

/// Orthogonal matrix from modified Gram-Schmidt on a standard normal matrix.
/// Deterministic given the stream. Retries with fresh draws (at most three
/// times) if a pivot collapses numerically.
inline Eigen::MatrixXd gram_schmidt_rotation(RngStream& rng, Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("gram_schmidt_rotation: n must be >= 2");
  for (int attempt = 0; attempt < 3; ++attempt) {
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) a(i, j) = rng.normal();
    bool ok = true;
    for (Eigen::Index j = 0; j < n && ok; ++j) {
      // two MGS sweeps keep ||Q^T Q - I|| near machine precision at large n
      for (int sweep = 0; sweep < 2; ++sweep)
        for (Eigen::Index i = 0; i < j; ++i)
          a.col(j) -= a.col(i).dot(a.col(j)) * a.col(i);
      const double nrm = a.col(j).norm();
      if (nrm < 1e-12 * std::sqrt(static_cast<double>(n))) {
        ok = false;
        break;
      }
      a.col(j) /= nrm;
    }
    if (ok) return a;
  }
  throw std::runtime_error("gram_schmidt_rotation: rank-deficient draws three times in a row");
}

/// A benchmark objective: one of the six base functions, optionally composed
/// with a rotation of the decision space (f(Rx)). Immutable after
/// construction and safe to evaluate from several threads.
class Problem {
 public:
  Problem(ObjectiveKind kind, Eigen::Index dim, double alpha = 6.0,
          std::optional<Eigen::MatrixXd> rotation = std::nullopt)
      : kind_(kind), dim_(dim), alpha_(alpha), rotation_(std::move(rotation)) {
    if (dim_ < 2) throw std::invalid_argument("Problem: dim must be >= 2");
    if (rotation_ && (rotation_->rows() != dim_ || rotation_->cols() != dim_))
      throw std::invalid_argument("Problem: rotation shape does not match dim");
    if (kind_ == ObjectiveKind::Ellipsoid) {
      coeff_.resize(dim_);
      const double e = alpha_ / static_cast<double>(dim_ - 1);
      for (Eigen::Index i = 0; i < dim_; ++i)
        coeff_[i] = std::pow(10.0, e * static_cast<double>(i));
    }
  }

  ObjectiveKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  double alpha() const { return alpha_; }
  bool rotated() const { return rotation_.has_value(); }
  const Eigen::MatrixXd& rotation() const {
    if (!rotation_) throw std::logic_error("Problem: no rotation present");
    return *rotation_;
  }

  /// Known global minimum value is 0 for every kind.
  Eigen::VectorXd base_optimum() const {
    return kind_ == ObjectiveKind::Rosenbrock ? Eigen::VectorXd::Ones(dim_)
                                              : Eigen::VectorXd::Zero(dim_).eval();
  }

  double evaluate(const Eigen::VectorXd& x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("Problem::evaluate: dimension mismatch");
    if (!rotation_) return base_eval(x);
    return base_eval((*rotation_) * x);
  }

  double operator()(const Eigen::VectorXd& x) const { return evaluate(x); }

 private:
  double base_eval(const Eigen::VectorXd& x) const {
    const Eigen::Index n = x.size();
    switch (kind_) {
      case ObjectiveKind::Sphere:
        return x.squaredNorm();
      case ObjectiveKind::Ellipsoid:
        return (coeff_.array() * x.array().square()).sum();
      case ObjectiveKind::Rosenbrock: {
        double s = 0.0;
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
          const double t = x[i] * x[i] - x[i + 1];
          const double u = x[i] - 1.0;
          s += 100.0 * t * t + u * u;
        }
        return s;
      }
      case ObjectiveKind::Discus:
        return 1e6 * x[0] * x[0] + x.tail(n - 1).squaredNorm();
      case ObjectiveKind::Cigar:
        return x[0] * x[0] + 1e6 * x.tail(n - 1).squaredNorm();
      case ObjectiveKind::DiffPow: {
        double s = 0.0;
        const double e = 4.0 / static_cast<double>(n - 1);
        for (Eigen::Index i = 0; i < n; ++i)
          s += std::pow(std::abs(x[i]), 2.0 + e * static_cast<double>(i));
        return s;
      }
    }
    throw std::logic_error("Problem: unknown kind");
  }

  ObjectiveKind kind_;
  Eigen::Index dim_;
  double alpha_;
  std::optional<Eigen::MatrixXd> rotation_;
  Eigen::VectorXd coeff_;  // ellipsoid scaling, fixed at construction
};

/// Parsed form of the CLI problem spec `name[:key=value]...`, e.g.
/// "elli:alpha=6:rot=1:dim=1000". Recognized keys: alpha, rot, dim.
struct ProblemSpec {
  ObjectiveKind kind = ObjectiveKind::Sphere;
  Eigen::Index dim = 0;  // 0 means "not given here"
  double alpha = 6.0;
  bool rotated = false;

  static ProblemSpec parse(std::string_view text);

  /// Instantiate; a rotated problem draws a fresh matrix from `rot_rng`.
  Problem instantiate(RngStream& rot_rng, Eigen::Index max_rotation_dim = 4096) const {
    if (dim < 2) throw std::invalid_argument("ProblemSpec: dim must be >= 2");
    std::optional<Eigen::MatrixXd> r;
    if (rotated) {
      if (dim > max_rotation_dim)
        throw std::invalid_argument(
            "ProblemSpec: rotated problem above --max-rotation-dim (" +
            std::to_string(max_rotation_dim) + "); dense storage would be impractical");
      r = gram_schmidt_rotation(rot_rng, dim);
    }
    return Problem(kind, dim, alpha, std::move(r));
  }

  std::string canonical() const {
    std::string s = to_string(kind);
    if (kind == ObjectiveKind::Ellipsoid) s += ":alpha=" + format_alpha();
    s += ":rot=" + std::string(rotated ? "1" : "0");
    s += ":dim=" + std::to_string(dim);
    return s;
  }

 private:
  std::string format_alpha() const {
    if (alpha == static_cast<long>(alpha))
      return std::to_string(static_cast<long>(alpha));
    return std::to_string(alpha);
  }
};

inline ProblemSpec ProblemSpec::parse(std::string_view text) {
  ProblemSpec spec;
  std::size_t pos = text.find(':');
  const std::string_view name = text.substr(0, pos);
  if (name == "sphere") spec.kind = ObjectiveKind::Sphere;
  else if (name == "elli" || name == "ellipsoid") spec.kind = ObjectiveKind::Ellipsoid;
  else if (name == "rosen" || name == "rosenbrock") spec.kind = ObjectiveKind::Rosenbrock;
  else if (name == "discus") spec.kind = ObjectiveKind::Discus;
  else if (name == "cigar") spec.kind = ObjectiveKind::Cigar;
  else if (name == "diffpow") spec.kind = ObjectiveKind::DiffPow;
  else throw std::invalid_argument("ProblemSpec: unknown problem '" + std::string(name) + "'");

  while (pos != std::string_view::npos) {
    const std::size_t next = text.find(':', pos + 1);
    const std::string_view field =
        text.substr(pos + 1, next == std::string_view::npos ? next : next - pos - 1);
    const std::size_t eq = field.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw std::invalid_argument("ProblemSpec: malformed field '" + std::string(field) + "'");
    const std::string key(field.substr(0, eq));
    const std::string val(field.substr(eq + 1));
    try {
      if (key == "alpha") spec.alpha = std::stod(val);
      else if (key == "rot") spec.rotated = std::stoi(val) != 0;
      else if (key == "dim") spec.dim = std::stol(val);
      else throw std::invalid_argument("ProblemSpec: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("ProblemSpec: bad value for '" + key + "'");
    }
    pos = next;
  }
  return spec;
}

}  // namespace mmes
