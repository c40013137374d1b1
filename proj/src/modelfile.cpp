#include "ksymp/modelfile.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "ksymp/errors.hpp"

namespace ksymp {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

int parse_int(const std::string& text, int line, const char* what) {
    try {
        std::size_t used = 0;
        const int value = std::stoi(text, &used);
        if (used != text.size())
            throw std::invalid_argument("trailing");
        return value;
    } catch (...) {
        throw ModelFileError(std::string("expected an integer for ") + what + ", got '" +
                             text + "'",
                             line);
    }
}

double parse_real(const std::string& text, int line) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size())
            throw std::invalid_argument("trailing");
        return value;
    } catch (...) {
        throw ModelFileError("expected a number, got '" + text + "'", line);
    }
}

Expr parse_expr_or_rethrow(const std::string& text, int line) {
    try {
        return Expr::parse(text);
    } catch (const ParseError& e) {
        throw ModelFileError(e.what(), line);
    }
}

} // namespace

ModelDocument parse_model(const std::string& text) {
    std::optional<int> k, n;
    std::optional<std::string> lag_text;
    int lag_line = 0;
    std::string name;
    std::optional<std::string> ham_text, h0_text;
    int ham_line = 0, h0_line = 0;
    std::vector<std::pair<std::string, int>> constraint_texts;
    std::vector<std::pair<std::string, int>> sample_texts;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos)
            raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ModelFileError("expected 'key = value'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty())
            throw ModelFileError("empty value for '" + key + "'", line_no);

        if (key == "k")
            k = parse_int(value, line_no, "k");
        else if (key == "n")
            n = parse_int(value, line_no, "n");
        else if (key == "lagrangian") {
            lag_text = value;
            lag_line = line_no;
        } else if (key == "name")
            name = value;
        else if (key == "hamiltonian") {
            ham_text = value;
            ham_line = line_no;
        } else if (key == "h0") {
            h0_text = value;
            h0_line = line_no;
        } else if (key == "constraint")
            constraint_texts.emplace_back(value, line_no);
        else if (key == "sample")
            sample_texts.emplace_back(value, line_no);
        else
            throw ModelFileError("unknown key '" + key + "'", line_no);
    }

    if (!k)
        throw ModelFileError("missing required key 'k'", line_no);
    if (!n)
        throw ModelFileError("missing required key 'n'", line_no);
    if (!lag_text)
        throw ModelFileError("missing required key 'lagrangian'", line_no);

    Expr lagrangian = parse_expr_or_rethrow(*lag_text, lag_line);

    ModelDocument doc{[&] {
                          try {
                              return FieldModel(*k, *n, std::move(lagrangian));
                          } catch (const ModelError& e) {
                              throw ModelFileError(e.what(), lag_line);
                          }
                      }(),
                      name,
                      {},
                      {},
                      {},
                      {},
                      {}};

    if (ham_text)
        doc.hamiltonian = parse_expr_or_rethrow(*ham_text, ham_line);
    if (h0_text)
        doc.h0 = parse_expr_or_rethrow(*h0_text, h0_line);
    for (const auto& [ctext, cline] : constraint_texts)
        doc.constraints.push_back(parse_expr_or_rethrow(ctext, cline));

    const FieldModel& m = doc.model;
    for (const auto& [stext, sline] : sample_texts) {
        std::string body = stext;
        std::string sname = "s" + std::to_string(doc.samples.size() + 1);
        const std::size_t colon = stext.find(':');
        if (colon != std::string::npos) {
            sname = trim(stext.substr(0, colon));
            body = stext.substr(colon + 1);
        }
        LagPoint x;
        x.q.assign(m.n, 0.0);
        x.v.assign(m.vdim(), 0.0);
        std::istringstream parts(body);
        std::string item;
        while (std::getline(parts, item, ',')) {
            item = trim(item);
            if (item.empty())
                continue;
            const std::size_t eq = item.find('=');
            if (eq == std::string::npos)
                throw ModelFileError("sample entries must be var=value", sline);
            const std::string var = trim(item.substr(0, eq));
            const double value = parse_real(trim(item.substr(eq + 1)), sline);
            bool found = false;
            for (int i = 0; i < m.n && !found; ++i)
                if (var == q_name(i)) {
                    x.q[i] = value;
                    found = true;
                }
            for (int i = 0; i < m.n && !found; ++i)
                for (int a = 0; a < m.k && !found; ++a)
                    if (var == v_name(i, a)) {
                        x.v[m.vflat(i, a)] = value;
                        found = true;
                    }
            if (!found)
                throw ModelFileError("unknown sample coordinate '" + var + "'", sline);
        }
        doc.sample_names.push_back(sname);
        doc.samples.push_back(std::move(x));
    }
    return doc;
}

ModelDocument load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ModelFileError("cannot open '" + path + "'", 0);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str());
}

} // namespace ksymp
