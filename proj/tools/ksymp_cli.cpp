// Command-line front end: model files in, derivations / sections / reports
// out. Everything goes through the shared-library C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ksymp/ksymp.h"

namespace {

struct ModelHandle {
    ksymp_model* ptr = nullptr;
    ~ModelHandle() { ksymp_model_free(ptr); }
};

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { ksymp_string_free(ptr); }
};

int fail(ksymp_status status) {
    std::cerr << "error: " << ksymp_last_error() << "\n";
    switch (status) {
    case KSYMP_ERR_PARSE:
    case KSYMP_ERR_INVALID:
    case KSYMP_ERR_IO:
        return 2;
    default:
        return 1;
    }
}

bool parse_doubles(const std::string& text, std::vector<double>& out) {
    out.clear();
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string::npos)
            end = text.size();
        const std::string part = text.substr(pos, end - pos);
        if (!part.empty()) {
            try {
                std::size_t used = 0;
                out.push_back(std::stod(part, &used));
                if (used != part.size())
                    return false;
            } catch (...) {
                return false;
            }
        }
        pos = end + 1;
        if (end == text.size())
            break;
    }
    return !out.empty();
}

int emit(const std::string& content, const std::string& out_dir, const std::string& filename) {
    if (out_dir.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n')
            std::cout << "\n";
        return 0;
    }
    const std::string path = out_dir + "/" + filename;
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot write '" << path << "'\n";
        return 2;
    }
    f << content;
    std::cerr << "wrote " << path << "\n";
    return 0;
}

std::string base_name(const ModelHandle& model, const std::string& fallback) {
    const std::string name = ksymp_model_name(model.ptr);
    return name.empty() ? fallback : name;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-symplectic field theory toolkit"};
    app.require_subcommand(1);

    std::string model_path;
    std::string q_text, v_text, grid_text;
    std::string out_dir;
    std::string format = "csv";
    std::string ansatz = "auto";
    int samples = 50;
    unsigned long long seed = 0;
    int substeps = 1;
    int max_levels = 8;
    double tol = 1e-9;
    double ctol = 1e-8;

    auto add_model_arg = [&](CLI::App* cmd) {
        cmd->add_option("model", model_path, "model file")->required();
    };

    CLI::App* cmd_derive = app.add_subcommand("derive", "print the symbolic derivation");
    add_model_arg(cmd_derive);
    cmd_derive->add_option("--out", out_dir, "output directory");

    CLI::App* cmd_check = app.add_subcommand("check", "regularity and identity checks");
    add_model_arg(cmd_check);
    cmd_check->add_option("--samples", samples, "number of seeded sample points");
    cmd_check->add_option("--seed", seed, "random seed");
    cmd_check->add_option("--tol", tol, "pullback residual tolerance");
    cmd_check->add_option("--out", out_dir, "output directory");

    CLI::App* cmd_integrate = app.add_subcommand("integrate", "integrate a section");
    add_model_arg(cmd_integrate);
    cmd_integrate->add_option("--q", q_text, "initial fields, comma-separated")->required();
    cmd_integrate->add_option("--v", v_text, "initial velocities, comma-separated")->required();
    cmd_integrate->add_option("--grid", grid_text, "grid, e.g. t1=0:1:0.01,t2=0:1:0.01")
        ->required();
    cmd_integrate->add_option("--substeps", substeps, "integrator substeps per interval");
    cmd_integrate->add_option("--ansatz", ansatz, "auto|symmetric|uniform");
    cmd_integrate->add_option("--format", format, "csv|json");
    cmd_integrate->add_option("--out", out_dir, "output directory");

    CLI::App* cmd_verify = app.add_subcommand("verify", "equivalence / constraint report");
    add_model_arg(cmd_verify);
    cmd_verify->add_option("--q", q_text, "datum fields")->required();
    cmd_verify->add_option("--v", v_text, "datum velocities")->required();
    cmd_verify->add_option("--grid", grid_text, "grid")->required();
    cmd_verify->add_option("--samples", samples, "number of seeded sample points");
    cmd_verify->add_option("--seed", seed, "random seed");
    cmd_verify->add_option("--substeps", substeps, "integrator substeps per interval");
    cmd_verify->add_option("--ansatz", ansatz, "auto|symmetric|uniform");
    cmd_verify->add_option("--out", out_dir, "output directory");

    CLI::App* cmd_constraints = app.add_subcommand("constraints", "constraint algorithm report");
    add_model_arg(cmd_constraints);
    cmd_constraints->add_option("--samples", samples, "number of seeded graph points");
    cmd_constraints->add_option("--seed", seed, "random seed");
    cmd_constraints->add_option("--max-levels", max_levels, "level cap");
    cmd_constraints->add_option("--tol", ctol, "consistency tolerance");
    cmd_constraints->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    ModelHandle model;
    {
        const ksymp_status st = ksymp_model_load_file(model_path.c_str(), &model.ptr);
        if (st != KSYMP_OK)
            return fail(st);
    }
    const int n = ksymp_model_n(model.ptr);
    const int k = ksymp_model_k(model.ptr);

    auto parse_datum = [&](std::vector<double>& q0, std::vector<double>& v0) -> int {
        if (!parse_doubles(q_text, q0) || static_cast<int>(q0.size()) != n) {
            std::cerr << "error: --q needs " << n << " comma-separated values\n";
            return 2;
        }
        if (!parse_doubles(v_text, v0) || static_cast<int>(v0.size()) != n * k) {
            std::cerr << "error: --v needs " << n * k
                      << " comma-separated values (row-major over fields, then slots)\n";
            return 2;
        }
        return 0;
    };

    if (cmd_derive->parsed()) {
        OwnedString text;
        const ksymp_status st = ksymp_derive(model.ptr, &text.ptr);
        if (st != KSYMP_OK)
            return fail(st);
        return emit(text.ptr, out_dir, base_name(model, "model") + "_derive.txt");
    }

    if (cmd_check->parsed()) {
        OwnedString json;
        int pass = 0;
        const ksymp_status st =
            ksymp_check(model.ptr, samples, seed, tol, &json.ptr, &pass);
        if (st != KSYMP_OK)
            return fail(st);
        const int rc = emit(json.ptr, out_dir, base_name(model, "model") + "_check.json");
        return rc != 0 ? rc : (pass ? 0 : 1);
    }

    if (cmd_integrate->parsed()) {
        std::vector<double> q0, v0;
        if (int rc = parse_datum(q0, v0))
            return rc;
        if (format != "csv" && format != "json") {
            std::cerr << "error: --format must be csv or json\n";
            return 2;
        }
        OwnedString body;
        int truncated = 0;
        const ksymp_status st =
            ksymp_integrate(model.ptr, q0.data(), v0.data(), grid_text.c_str(), substeps,
                            ansatz.c_str(), format.c_str(), &body.ptr, &truncated);
        if (st != KSYMP_OK)
            return fail(st);
        const std::string ext = format == "json" ? "_section.json" : "_section.csv";
        const int rc = emit(body.ptr, out_dir, base_name(model, "model") + ext);
        if (rc != 0)
            return rc;
        if (truncated) {
            std::cerr << "warning: integration truncated (state blow-up)\n";
            return 1;
        }
        return 0;
    }

    if (cmd_verify->parsed()) {
        std::vector<double> q0, v0;
        if (int rc = parse_datum(q0, v0))
            return rc;
        OwnedString json;
        int pass = 0;
        const ksymp_status st =
            ksymp_verify(model.ptr, q0.data(), v0.data(), grid_text.c_str(), samples, seed,
                         substeps, ansatz.c_str(), &json.ptr, &pass);
        if (st != KSYMP_OK)
            return fail(st);
        const int rc = emit(json.ptr, out_dir, base_name(model, "model") + "_verify.json");
        return rc != 0 ? rc : (pass ? 0 : 1);
    }

    if (cmd_constraints->parsed()) {
        OwnedString json;
        int pass = 0;
        const ksymp_status st = ksymp_constraints(model.ptr, samples, seed, max_levels, ctol,
                                                  &json.ptr, &pass);
        if (st != KSYMP_OK)
            return fail(st);
        const int rc =
            emit(json.ptr, out_dir, base_name(model, "model") + "_constraints.json");
        return rc != 0 ? rc : (pass ? 0 : 1);
    }

    return 2;
}
