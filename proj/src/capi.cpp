#include "ksymp/ksymp.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "ksymp/derive.hpp"
#include "ksymp/errors.hpp"
#include "ksymp/modelfile.hpp"
#include "ksymp/verify.hpp"

using namespace ksymp;

struct ksymp_model {
    ModelDocument doc;
};

namespace {

thread_local std::string g_last_error;

char* copy_out(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
ksymp_status guarded(Fn&& fn) {
    try {
        fn();
        return KSYMP_OK;
    } catch (const ParseError& e) {
        g_last_error = e.what();
        return KSYMP_ERR_PARSE;
    } catch (const ModelFileError& e) {
        g_last_error = e.what();
        return KSYMP_ERR_PARSE;
    } catch (const EvalError& e) {
        g_last_error = e.what();
        return KSYMP_ERR_EVAL;
    } catch (const ModelError& e) {
        g_last_error = e.what();
        return KSYMP_ERR_INVALID;
    } catch (const NumericError& e) {
        g_last_error = e.what();
        return KSYMP_ERR_NUMERIC;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return KSYMP_ERR_INVALID;
    }
}

LagPoint datum_from(const ModelDocument& doc, const double* q0, const double* v0) {
    const FieldModel& m = doc.model;
    LagPoint x;
    x.q.assign(q0, q0 + m.n);
    x.v.assign(v0, v0 + m.vdim());
    return x;
}

} // namespace

extern "C" {

const char* ksymp_last_error(void) { return g_last_error.c_str(); }

ksymp_status ksymp_model_load_file(const char* path, ksymp_model** out) {
    if (FILE* probe = std::fopen(path, "rb")) {
        std::fclose(probe);
    } else {
        g_last_error = std::string("cannot open '") + path + "'";
        return KSYMP_ERR_IO;
    }
    return guarded([&] {
        auto* handle = new ksymp_model{load_model_file(path)};
        *out = handle;
    });
}

ksymp_status ksymp_model_load_string(const char* text, ksymp_model** out) {
    return guarded([&] {
        auto* handle = new ksymp_model{parse_model(text)};
        *out = handle;
    });
}

void ksymp_model_free(ksymp_model* model) { delete model; }

int ksymp_model_k(const ksymp_model* model) { return model->doc.model.k; }
int ksymp_model_n(const ksymp_model* model) { return model->doc.model.n; }
const char* ksymp_model_name(const ksymp_model* model) { return model->doc.name.c_str(); }

ksymp_status ksymp_derive(const ksymp_model* model, char** out_text) {
    return guarded([&] { *out_text = copy_out(derive_text(model->doc.model, model->doc.name)); });
}

ksymp_status ksymp_check(const ksymp_model* model, int samples, unsigned long long seed,
                         double tol, char** out_json, int* out_pass) {
    return guarded([&] {
        const CheckReport r = check_report(model->doc.model, samples, seed, tol);
        *out_json = copy_out(check_json(r));
        if (out_pass)
            *out_pass = r.pass ? 1 : 0;
    });
}

ksymp_status ksymp_integrate(const ksymp_model* model, const double* q0, const double* v0,
                             const char* grid, int substeps, const char* ansatz,
                             const char* format, char** out, int* out_truncated) {
    return guarded([&] {
        const FieldModel& m = model->doc.model;
        const Grid g = Grid::parse(grid);
        const LagPoint x0 = datum_from(model->doc, q0, v0);

        const std::string ansatz_name = ansatz ? ansatz : "auto";
        KVectorField field;
        if (ansatz_name == "symmetric")
            field = sopde_field(m, SopdeAnsatz::Symmetric);
        else if (ansatz_name == "uniform")
            field = sopde_field(m, SopdeAnsatz::Uniform);
        else {
            field = sopde_field(m, SopdeAnsatz::Symmetric);
            if (m.k > 1 && bracket_max(field, m.flatten(x0)) > 1e-6)
                field = sopde_field(m, SopdeAnsatz::Uniform);
        }

        IntegrateOptions opts;
        opts.substeps = substeps >= 1 ? substeps : 1;
        const IntegrationResult result = integrate_section(m, field, x0, g, opts);

        Section section = result.section;
        section.compute_fd_derivatives(false);
        const double holonomy = holonomy_check(m, section);

        const std::string fmt = format ? format : "csv";
        if (fmt == "json") {
            std::vector<std::pair<std::string, std::string>> meta;
            meta.emplace_back("model_hash", "\"" + m.hash() + "\"");
            meta.emplace_back("holonomy_max_interior", format_double(holonomy));
            meta.emplace_back("substeps", std::to_string(opts.substeps));
            *out = copy_out(section_json(section, meta));
        } else if (fmt == "csv") {
            *out = copy_out(section_csv(section));
        } else {
            throw ModelError("unknown format '" + fmt + "' (expected csv or json)");
        }
        if (out_truncated)
            *out_truncated = result.truncated ? 1 : 0;
    });
}

ksymp_status ksymp_verify(const ksymp_model* model, const double* q0, const double* v0,
                          const char* grid, int samples, unsigned long long seed,
                          int substeps, const char* ansatz, char** out_json, int* out_pass) {
    return guarded([&] {
        const FieldModel& m = model->doc.model;
        const LagPoint x0 = datum_from(model->doc, q0, v0);

        const RegularityReport reg = is_regular(m, {x0}, 1e-9);
        if (reg.regular) {
            VerifyOptions opts;
            opts.ansatz = ansatz ? ansatz : "auto";
            opts.seed = seed;
            opts.samples = samples;
            opts.substeps = substeps >= 1 ? substeps : 1;
            opts.hamiltonian = model->doc.hamiltonian;
            const EquivalenceReport r = equivalence_report(m, x0, Grid::parse(grid), opts);
            *out_json = copy_out(equivalence_json(r));
            if (out_pass)
                *out_pass = r.all_pass ? 1 : 0;
        } else {
            SingularOptions opts;
            opts.seed = seed;
            opts.h0 = model->doc.h0;
            // Declared sample points define the submanifold of interest;
            // fall back to seeded random samples when there are none.
            std::vector<LagPoint> pts = model->doc.samples;
            pts.push_back(x0);
            if (model->doc.samples.empty() && samples > 1) {
                const std::vector<LagPoint> extra = random_lag_points(m, samples - 1, seed);
                pts.insert(pts.end(), extra.begin(), extra.end());
            }
            const SingularReport r = singular_report(m, pts, opts);
            *out_json = copy_out(singular_json(r));
            if (out_pass)
                *out_pass = r.pass ? 1 : 0;
        }
    });
}

ksymp_status ksymp_constraints(const ksymp_model* model, int samples,
                               unsigned long long seed, int max_levels, double tol,
                               char** out_json, int* out_pass) {
    return guarded([&] {
        if (samples < 1)
            throw ModelError("sample count must be positive");
        const FieldModel& m = model->doc.model;
        std::vector<UnifiedPoint> pts = random_graph_points(m, samples, seed);
        for (const auto& x : model->doc.samples) {
            const HamPoint y = legendre(m, x);
            UnifiedPoint w;
            w.q = x.q;
            w.v = x.v;
            w.p = y.p;
            pts.push_back(std::move(w));
        }
        const ConstraintReport r =
            constraint_algorithm(m, pts, max_levels >= 1 ? max_levels : 8, tol);
        *out_json = copy_out(constraint_json(m.hash(), r, samples, seed));
        if (out_pass)
            *out_pass = r.stabilized ? 1 : 0;
    });
}

void ksymp_string_free(char* s) { std::free(s); }

} // extern "C"
