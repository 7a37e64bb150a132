#pragma once

#include <functional>

#include "greenforms/bundle.hpp"
#include "greenforms/dec.hpp"
#include "greenforms/mesh.hpp"
#include "greenforms/rng.hpp"

namespace greenforms {

// A smooth p-form with values in R^rank. The returned vector holds the
// coefficients of dx_I (multi-indices in lexicographic order), component-major:
// entry c * rank + a is fibre component a of dx_{I_c}.
using FormField = std::function<Vec(const Point&)>;

// de Rham map: integrate the field over every p-simplex with its canonical
// orientation. Quadrature is a collapsed Gauss product with `order` points per axis.
Cochain interpolate(const SimplicialMesh& mesh, int p, int rank, const FormField& field, int order = 4);

// Sum of a few random plane waves with wave numbers up to `max_frequency`;
// coefficients are standard normal and the result is deterministic in `rng`.
FormField random_smooth_form(int n, int p, int rank, Rng& rng, int waves = 6, double max_frequency = 2.0);

// w_sigma -> g_{base(sigma)} w_sigma: carries a trivial-frame cochain into the
// frame of a pure-gauge bundle (identity for bundles without a stored gauge).
Cochain to_bundle_frame(const SimplicialMesh& mesh, const FlatBundle& bundle, const Cochain& c);

// mass inner product of two full cochains of the same degree
double mass_inner(const SpMat& mass, const Vec& a, const Vec& b);
double mass_norm(const SpMat& mass, const Vec& a);

}  // namespace greenforms
