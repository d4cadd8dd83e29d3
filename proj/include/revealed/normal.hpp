#pragma once

namespace revealed {

// Standard normal CDF and quantile. Interface contract: both are accurate to
// at least 1e-12 absolute error over their domains; norm_ppf uses a rational
// approximation evaluated in fixed arithmetic order so seeded simulations
// reproduce exactly.
double norm_cdf(double x);
double norm_ppf(double p);  // p in (0, 1); throws contract_error otherwise

double logit(double p);      // log(p / (1 - p)), p in (0, 1)
double logistic(double x);   // 1 / (1 + exp(-x))

}  // namespace revealed
