#include "gsmix/design_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace gsmix {

namespace {

using nlohmann::json;

// byte offset -> (line, column) for parse error reporting
std::pair<int, int> locate(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

double require_number(const json& j, const char* key) {
    if (!j.contains(key)) {
        std::ostringstream msg;
        msg << "design file: missing required key \"" << key << "\"";
        throw std::invalid_argument(msg.str());
    }
    if (!j.at(key).is_number()) {
        std::ostringstream msg;
        msg << "design file: key \"" << key << "\" must be a number";
        throw std::invalid_argument(msg.str());
    }
    return j.at(key).get<double>();
}

std::vector<double> number_array(const json& j, const char* key, int expect) {
    if (!j.at(key).is_array()) {
        std::ostringstream msg;
        msg << "design file: key \"" << key << "\" must be an array";
        throw std::invalid_argument(msg.str());
    }
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) {
            std::ostringstream msg;
            msg << "design file: entries of \"" << key << "\" must be numbers";
            throw std::invalid_argument(msg.str());
        }
        out.push_back(v.get<double>());
    }
    if (expect >= 0 && static_cast<int>(out.size()) != expect) {
        std::ostringstream msg;
        msg << "design file: \"" << key << "\" must have " << expect << " entries";
        throw std::invalid_argument(msg.str());
    }
    return out;
}

}  // namespace

DesignFile read_design_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open design file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
        std::ostringstream msg;
        msg << path << ": parse error at line " << line << ", column " << col << ": "
            << e.what();
        throw ParseError(line, col, msg.str());
    }
    if (!j.is_object()) throw std::invalid_argument("design file: top level must be an object");

    DesignFile f;
    double kd = require_number(j, "k");
    f.k = static_cast<int>(kd);
    if (f.k < 1 || kd != f.k)
        throw std::invalid_argument("design file: \"k\" must be a positive integer");

    bool has_alt = j.contains("alternatives");
    bool has_bnd = j.contains("boundaries");
    if (has_alt == has_bnd)
        throw std::invalid_argument(
            "design file: exactly one of \"alternatives\" or \"boundaries\" is required");

    if (has_alt) {
        f.alternatives = number_array(j, "alternatives", f.k);
        f.alpha = require_number(j, "alpha");
        f.power = require_number(j, "power");
    } else {
        if (j.contains("alpha")) f.alpha = require_number(j, "alpha");
        if (j.contains("power")) f.power = require_number(j, "power");
    }

    if (j.contains("alpha0_override")) {
        const auto& a0 = j.at("alpha0_override");
        if (a0.is_number()) {
            f.alpha0.assign(f.k, a0.get<double>());
        } else {
            f.alpha0 = number_array(j, "alpha0_override", f.k);
        }
    }

    if (has_bnd) {
        const auto& b = j.at("boundaries");
        if (!b.is_object() || !b.contains("n") || !b.contains("c"))
            throw std::invalid_argument(
                "design file: \"boundaries\" must be an object with \"n\" and \"c\"");
        std::vector<double> nd = number_array(b, "n", f.k);
        std::vector<double> c = number_array(b, "c", f.k);
        std::vector<int> n(f.k);
        for (int i = 0; i < f.k; ++i) {
            n[i] = static_cast<int>(nd[i]);
            if (nd[i] != n[i] || n[i] < 1)
                throw std::invalid_argument(
                    "design file: stage sizes must be positive integers");
        }
        f.boundaries = Design(n, c);
    }
    return f;
}

void write_design_file(const std::string& path, const DesignFile& f) {
    json j;
    j["k"] = f.k;
    j["alpha"] = f.alpha;
    j["power"] = f.power;
    if (!f.alpha0.empty()) j["alpha0_override"] = f.alpha0;
    if (f.boundaries) {
        j["boundaries"] = {{"n", f.boundaries->n}, {"c", f.boundaries->c}};
    } else {
        j["alternatives"] = f.alternatives;
    }
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write design file: " + path);
    out << j.dump(2) << "\n";
}

DesignSpec spec_of(const DesignFile& f) {
    if (f.alternatives.empty())
        throw std::invalid_argument("design file: \"alternatives\" required to solve a design");
    DesignSpec spec;
    spec.k = f.k;
    spec.alpha = f.alpha;
    spec.power = f.power;
    spec.alternatives = f.alternatives;
    spec.alphas = f.alpha0;
    spec.validate();
    return spec;
}

Design design_of(const DesignFile& f, EngineGrid g) {
    if (f.boundaries) return *f.boundaries;
    return solve_design(spec_of(f), g).design;
}

std::string format_sig(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_oc_header(std::ostream& os) {
    os << "theta,stage,stop_prob,reject_prob,cum_reject,expected_n\n";
}

void write_oc_rows(std::ostream& os, const Design& d, const OcRow& row) {
    for (int k = 0; k < d.stages(); ++k) {
        os << format_sig(row.theta) << ',' << (k + 1) << ',' << format_sig(row.stop_prob[k])
           << ',' << format_sig(row.reject_prob[k]) << ',' << format_sig(row.cum_reject[k])
           << ',' << format_sig(row.expected_n) << "\n";
    }
}

}  // namespace gsmix
