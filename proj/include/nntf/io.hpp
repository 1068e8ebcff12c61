#pragma once

#include "nntf/dense_tensor.hpp"
#include "nntf/diagnostics.hpp"
#include "nntf/kruskal_model.hpp"
#include "nntf/solvers.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nntf::io {

/// Decimal text with 17 significant digits; round-trips every finite double.
inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace details {

inline void write_list(std::ostream& os, const std::vector<double>& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        os << format_double(v[i]);
    }
    os << ']';
}

inline void write_shape(std::ostream& os, const Shape& shape) {
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
}

inline nlohmann::json parse(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw std::invalid_argument(std::string("malformed JSON: ") + ex.what());
    }
}

inline Shape read_shape(const nlohmann::json& j) {
    if (!j.contains("shape") || !j["shape"].is_array()) {
        throw std::invalid_argument("missing 'shape' array");
    }
    Shape shape;
    for (const auto& d : j["shape"]) {
        if (!d.is_number_unsigned()) {
            throw std::invalid_argument("'shape' entries must be positive integers");
        }
        shape.push_back(d.get<std::size_t>());
    }
    return shape;
}

inline std::vector<double> read_numbers(const nlohmann::json& j, const char* what) {
    if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw std::invalid_argument(std::string(what) + " entries must be numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace details

/// {"shape":[...],"data":[...]} with row-major data.
inline std::string tensor_to_json(const DenseTensor& t) {
    std::ostringstream os;
    os << "{\"shape\":";
    details::write_shape(os, t.shape());
    os << ",\"data\":";
    details::write_list(os, std::vector<double>(t.data().begin(), t.data().end()));
    os << "}\n";
    return os.str();
}

inline DenseTensor tensor_from_json(const std::string& text) {
    const auto j = details::parse(text);
    if (!j.is_object() || !j.contains("data")) {
        throw std::invalid_argument("tensor document needs 'shape' and 'data'");
    }
    return DenseTensor(details::read_shape(j), details::read_numbers(j["data"], "'data'"));
}

/// {"shape":[...],"delta":[...],"factors":[[[row],...],...]}; factor i is
/// stored as its d_i rows, each of length r.
inline std::string model_to_json(const KruskalModel& m) {
    m.validate();
    std::ostringstream os;
    os << "{\"shape\":";
    details::write_shape(os, m.shape);
    os << ",\"delta\":";
    details::write_list(os, m.delta);
    os << ",\"factors\":[";
    for (std::size_t i = 0; i < m.factors.size(); ++i) {
        if (i) os << ',';
        os << '[';
        const Matrix& f = m.factors[i];
        for (Eigen::Index row = 0; row < f.rows(); ++row) {
            if (row) os << ',';
            std::vector<double> r(static_cast<std::size_t>(f.cols()));
            for (Eigen::Index p = 0; p < f.cols(); ++p) r[static_cast<std::size_t>(p)] = f(row, p);
            details::write_list(os, r);
        }
        os << ']';
    }
    os << "]}\n";
    return os.str();
}

inline KruskalModel model_from_json(const std::string& text) {
    const auto j = details::parse(text);
    if (!j.is_object() || !j.contains("delta") || !j.contains("factors")) {
        throw std::invalid_argument("model document needs 'shape', 'delta' and 'factors'");
    }
    KruskalModel m;
    m.shape = details::read_shape(j);
    m.delta = details::read_numbers(j["delta"], "'delta'");
    const auto& fs = j["factors"];
    if (!fs.is_array() || fs.size() != m.shape.size()) {
        throw std::invalid_argument("'factors' must hold one matrix per mode");
    }
    const auto r = static_cast<Eigen::Index>(m.delta.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto& rows = fs[i];
        if (!rows.is_array() || rows.size() != m.shape[i]) {
            throw std::invalid_argument("factor " + std::to_string(i) + " has wrong row count");
        }
        Matrix f(static_cast<Eigen::Index>(m.shape[i]), r);
        for (std::size_t row = 0; row < rows.size(); ++row) {
            const auto vals = details::read_numbers(rows[row], "factor row");
            if (static_cast<Eigen::Index>(vals.size()) != r) {
                throw std::invalid_argument("factor rows must have one entry per component");
            }
            for (Eigen::Index p = 0; p < r; ++p) {
                f(static_cast<Eigen::Index>(row), p) = vals[static_cast<std::size_t>(p)];
            }
        }
        m.factors.push_back(std::move(f));
    }
    m.validate();
    return m;
}

inline std::string trace_to_csv(const FitTrace& trace) {
    std::ostringstream os;
    os << "iter,objective,delta_l1,max_component_F,residual_E\n";
    for (const auto& r : trace.rows) {
        os << r.iter << ',' << format_double(r.objective) << ','
           << format_double(r.delta_l1) << ',' << format_double(r.max_component_F) << ','
           << format_double(r.residual_E) << '\n';
    }
    return os.str();
}

inline std::string summary_to_csv(const ContrastSummary& summary) {
    std::ostringstream os;
    os << "seed,family,verdict,final_residual_E,final_residual_F,blowup_ratio,iters\n";
    for (const auto& r : summary.rows) {
        os << r.seed << ',' << to_string(r.family) << ','
           << to_string(r.verdict)
           << ',' << format_double(r.final_residual_E) << ','
           << format_double(r.final_residual_F) << ',' << format_double(r.blowup_ratio)
           << ',' << r.iters << '\n';
    }
    return os.str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline DenseTensor load_tensor(const std::string& path) { return tensor_from_json(read_file(path)); }
inline KruskalModel load_model(const std::string& path) { return model_from_json(read_file(path)); }

} // namespace nntf::io
