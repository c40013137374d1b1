#pragma once

#include <string>

#include "ksymp/model.hpp"

namespace ksymp {

/// Deterministic text rendering of the model's derived objects: the
/// Euler-Lagrange equations, the Legendre map components, the energy, the
/// velocity Hessian, and the 1- and 2-form coefficient matrices, all in
/// canonical coordinate order.
std::string derive_text(const FieldModel& m, const std::string& name = "");

} // namespace ksymp
