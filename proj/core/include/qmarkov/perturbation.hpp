#pragma once

#include <functional>
#include <vector>

#include "qmarkov/chain.hpp"

namespace qmarkov {

/// Second-order expansion T(n) = T0 + T1/sqrt(n) + T2/n + O(n^{-3/2}) of a
/// family of contractions. T0 must be a unital mixing map.
struct MapExpansion {
  SuperOperator T0, T1, T2;
};

using MapFamily = std::function<SuperOperator(long n)>;

/// Inner product <A,B>_st = Tr(rho_st A^dag B).
struct StationaryPairing {
  DensityMatrix rho_st;
  Complex operator()(const Matrix& a, const Matrix& b) const {
    return (rho_st.rho * a.adjoint() * b).trace();
  }
};

/// Stationary state of the dual of a unital Heisenberg-picture map.
DensityMatrix stationary_from_heisenberg(const SuperOperator& t0);

/// Solves (Id - T0) x = y on the orthogonal complement of 1 under <.,.>_st.
/// The caller must center y (|<1,y>_st| < tol::centering); the returned x
/// satisfies <1,x>_st = 0. Throws for a non-mixing or non-unital T0.
Matrix restricted_inverse_apply(const SuperOperator& t0, const DensityMatrix& rho_st,
                                const Matrix& y);

/// The scalar lambda = Tr(rho_st (T2(1) + T1 (Id - T0)^{-1} T1(1))) governing
/// lim T(n)^n[1] = exp(lambda) 1. Requires <1, T1(1)>_st = 0.
Complex lambda_second_order(const MapExpansion& expansion, const DensityMatrix& rho_st);

struct IteratedLimitRow {
  long n;
  Complex value;  // Tr(rho T(n)^n[1])
  double error;   // || T(n)^n[1] - exp(lambda) 1 ||_F
};

struct IteratedLimitReport {
  std::vector<IteratedLimitRow> table;
  Complex lambda{0.0, 0.0};
  Complex limit_value{1.0, 0.0};       // exp(lambda)
  double fitted_decay_exponent = 0.0;  // slope of log error vs log n (0 if error ~ roundoff)
};

/// Iterates T(n)^n[1] along n_list and reports the distance to exp(lambda) 1.
/// The family is first checked against the expansion (remainder must decay
/// like n^{-3/2}) and spot-checked for contractivity on sampled operators.
IteratedLimitReport verify_iterated_limit(const MapFamily& family, const MapExpansion& expansion,
                                          const DensityMatrix& initial,
                                          const std::vector<long>& n_list);

struct LeadingEigenRow {
  long n;
  Complex lambda_n;
};

struct LeadingEigenReport {
  std::vector<LeadingEigenRow> table;
  // Least-squares coefficients of lambda(n) = l0 + l1/sqrt(n) + l2/n + l3/n^{3/2}.
  Complex lambda0_fit{0.0, 0.0};
  Complex lambda1_fit{0.0, 0.0};
  Complex lambda2_fit{0.0, 0.0};
};

/// Leading eigenvalue of T(n) along n_list plus a fit of its expansion in
/// powers of 1/sqrt(n). Throws when the leading eigenvalue is not separated
/// (modulus gap below 1e-6). Needs at least four n values.
LeadingEigenReport leading_eigen_expansion(const MapFamily& family, const std::vector<long>& n_list);

}  // namespace qmarkov
