#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lipdual/dictlearn.hpp"
#include "lipdual/minmax.hpp"

namespace lipdual {

using nlohmann::json;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Canonical serialization: keys sorted (json's object order), every float
/// written with 17 significant digits, no whitespace variance. Identical
/// documents always produce identical bytes.
inline void canonical_write(std::ostream& os, const json& value) {
    switch (value.type()) {
        case json::value_t::object: {
            os << '{';
            bool first = true;
            for (const auto& item : value.items()) {
                if (!first) os << ',';
                first = false;
                os << json(item.key()).dump() << ':';
                canonical_write(os, item.value());
            }
            os << '}';
            break;
        }
        case json::value_t::array: {
            os << '[';
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (i) os << ',';
                canonical_write(os, value[i]);
            }
            os << ']';
            break;
        }
        case json::value_t::number_float:
            os << format_double(value.get<double>());
            break;
        default:
            os << value.dump();
    }
}

inline std::string canonical_dump(const json& value) {
    std::ostringstream os;
    canonical_write(os, value);
    return os.str();
}

inline json to_json_array(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

inline Eigen::VectorXd vector_from_json(const json& arr, const std::string& name) {
    detail::require(arr.is_array(), name + " must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        detail::require(arr[i].is_number(), name + " entries must be numbers");
        v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    detail::require_finite(v, name);
    return v;
}

/// Instance schema:
/// {"x": [...], "phi": [[row-major]], "epsilon": e, "delta": d,
///  "cost": {"kind": "l1"|"l2"|"l1_nonneg"}}
inline ProblemInstance instance_from_json(const json& doc) {
    detail::require(doc.is_object(), "instance document must be a JSON object");
    for (const char* key : {"x", "phi", "epsilon", "delta", "cost"})
        detail::require(doc.contains(key), std::string("instance is missing \"") + key + "\"");

    const Eigen::VectorXd x = vector_from_json(doc["x"], "x");
    const json& rows = doc["phi"];
    detail::require(rows.is_array() && !rows.empty(), "phi must be a non-empty array of rows");
    const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
    detail::require(cols > 0, "phi rows must be non-empty arrays");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        detail::require(rows[i].is_array() && rows[i].size() == cols, "phi rows must have equal length");
        for (std::size_t j = 0; j < cols; ++j) {
            detail::require(rows[i][j].is_number(), "phi entries must be numbers");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
        }
    }
    detail::require_finite(m, "phi");

    detail::require(doc["epsilon"].is_number(), "epsilon must be a number");
    detail::require(doc["delta"].is_number(), "delta must be a number");
    const double eps = doc["epsilon"].get<double>();
    const double delta = doc["delta"].get<double>();
    detail::require(std::isfinite(eps) && eps >= 0.0, "epsilon must be finite and >= 0");
    detail::require(std::isfinite(delta) && delta >= 0.0, "delta must be finite and >= 0");

    detail::require(doc["cost"].is_object() && doc["cost"].contains("kind"), "cost.kind is required");
    const CostPtr cost = make_cost(doc["cost"]["kind"].get<std::string>(), m.cols());
    return ProblemInstance(x, LinearOperator(std::move(m)), eps, delta, cost);
}

inline json instance_to_json(const ProblemInstance& inst) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < inst.phi.matrix().rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < inst.phi.matrix().cols(); ++j) row.push_back(inst.phi.matrix()(i, j));
        rows.push_back(row);
    }
    return json{{"x", to_json_array(inst.x)},
                {"phi", rows},
                {"epsilon", inst.epsilon},
                {"delta", inst.delta},
                {"cost", json{{"kind", inst.cost->name()}}}};
}

inline json parse_file(const std::string& path) {
    std::ifstream in(path);
    detail::require(in.good(), "cannot open file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("malformed JSON in '" + path + "': " + e.what());
    }
}

inline ProblemInstance read_instance(const std::string& path) {
    return instance_from_json(parse_file(path));
}

inline json solution_to_json(const PrimalSolution& sol) {
    return json{{"cost_value", sol.cost_value},
                {"scale", sol.scale},
                {"f", to_json_array(sol.f)},
                {"h", to_json_array(sol.h)},
                {"residual_norm", sol.residual_norm}};
}

inline Eigen::VectorXd read_solution_f(const std::string& path) {
    const json doc = parse_file(path);
    detail::require(doc.is_object() && doc.contains("f"), "solution file must contain \"f\"");
    return vector_from_json(doc["f"], "f");
}

inline json certificate_to_json(const DualCertificate& cert) {
    return json{{"lambda", to_json_array(cert.lambda)},
                {"dual_gauge_norm", cert.dual_gauge_norm},
                {"margin", cert.margin},
                {"in_Lambda", cert.in_Lambda},
                {"degenerate", cert.degenerate}};
}

inline json finite_or_tag(double v) {
    if (is_infinite(v)) return json("infinite");
    return json(v);
}

inline json report_to_json(const CertificateReport& report) {
    return json{{"primal_upper", finite_or_tag(report.primal_upper)},
                {"dual_lower", report.dual_lower},
                {"gap", finite_or_tag(report.gap)},
                {"active_constraint_residual", report.active_constraint_residual},
                {"lambda_report", certificate_to_json(report.lambda_report)}};
}

/// Dictionary schema: {"n": ..., "K": ..., "columns": [[column] ...]}
inline json dictionary_to_json(const Dictionary& dict) {
    json cols = json::array();
    for (Eigen::Index k = 0; k < dict.atom_count(); ++k) cols.push_back(to_json_array(dict.columns.col(k)));
    return json{{"n", dict.ambient_dim()}, {"K", dict.atom_count()}, {"columns", cols}};
}

inline Dictionary dictionary_from_json(const json& doc) {
    detail::require(doc.is_object() && doc.contains("columns"), "dictionary document must contain \"columns\"");
    const json& cols = doc["columns"];
    detail::require(cols.is_array() && !cols.empty(), "dictionary columns must be a non-empty array");
    const Eigen::VectorXd first = vector_from_json(cols[0], "columns[0]");
    Eigen::MatrixXd m(first.size(), static_cast<Eigen::Index>(cols.size()));
    m.col(0) = first;
    for (std::size_t k = 1; k < cols.size(); ++k) {
        const Eigen::VectorXd col = vector_from_json(cols[k], "columns");
        detail::require(col.size() == m.rows(), "dictionary columns must share dimension");
        m.col(static_cast<Eigen::Index>(k)) = col;
    }
    return Dictionary{std::move(m)};
}

/// Dataset CSV: one sample per row. An optional header row names the columns;
/// when its last name is "epsilon" that column carries per-sample thresholds
/// (default 0 without it).
inline Dataset read_dataset_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    bool header_checked = false;
    bool has_epsilon = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!header_checked) {
            header_checked = true;
            bool numeric = true;
            for (const auto& f : fields) {
                try {
                    std::size_t pos = 0;
                    std::stod(f, &pos);
                    if (pos != f.size()) numeric = false;
                } catch (...) {
                    numeric = false;
                }
            }
            if (!numeric) {
                has_epsilon = !fields.empty() && fields.back() == "epsilon";
                continue;
            }
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(std::stod(f));
        rows.push_back(std::move(row));
    }
    detail::require(!rows.empty(), "dataset CSV has no samples");
    const std::size_t width = rows[0].size();
    const std::size_t n = has_epsilon ? width - 1 : width;
    detail::require(n >= 1, "dataset CSV rows are too short");

    Dataset data;
    data.samples.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows.size()));
    data.epsilons = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        detail::require(rows[t].size() == width, "dataset CSV rows must have equal length");
        for (std::size_t i = 0; i < n; ++i)
            data.samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = rows[t][i];
        if (has_epsilon) data.epsilons[static_cast<Eigen::Index>(t)] = rows[t][n];
    }
    data.validate();
    return data;
}

inline Dataset read_dataset_csv_file(const std::string& path) {
    std::ifstream in(path);
    detail::require(in.good(), "cannot open file '" + path + "'");
    return read_dataset_csv(in);
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os << "iteration,margin,objective,primal_upper,dual_lower,gap\n";
    for (const auto& row : trace) {
        os << row.iteration << ',' << format_double(row.margin) << ',' << format_double(row.objective)
           << ',' << format_double(row.primal_upper) << ',' << format_double(row.dual_lower) << ','
           << format_double(row.gap) << '\n';
    }
}

} // namespace lipdual
