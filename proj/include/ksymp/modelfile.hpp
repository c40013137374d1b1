#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ksymp/model.hpp"

namespace ksymp {

/// A model file is a plain-text key-value document:
///
///   # comment
///   name = harmonic
///   k = 2
///   n = 1
///   lagrangian = 0.5*(v1_1^2 + v1_2^2) - q1^2
///   hamiltonian = 0.5*(p1_1^2 + p2_1^2) + q1^2   # optional explicit H
///   h0 = 0.5*p1_1^2                              # optional restricted H
///   constraint = p2_1                            # repeatable, momentum side
///   sample = s1: q1=0.4, v1_1=0.7, v1_2=0        # repeatable, named
///
/// `k`, `n` and `lagrangian` are required. Sample coordinates default to 0.
struct ModelDocument {
    FieldModel model;
    std::string name;
    std::optional<Expr> hamiltonian;
    std::optional<Expr> h0;
    std::vector<Expr> constraints;
    std::vector<std::string> sample_names;
    std::vector<LagPoint> samples;
};

/// Parse from text; errors carry the 1-based line number.
ModelDocument parse_model(const std::string& text);

/// Read and parse a file; IO failures raise ModelFileError on line 0.
ModelDocument load_model_file(const std::string& path);

} // namespace ksymp
