#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "powermap/features.hpp"
#include "powermap/json_text.hpp"
#include "powermap/power_engine.hpp"
#include "powermap/stat_models.hpp"
#include "powermap/surrogate.hpp"

namespace powermap {

// FNV-1a, used to stamp configs and datasets into reports.
inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Design / hypothesis JSON fragments
// ---------------------------------------------------------------------------

inline std::string design_to_json(const DesignSpec& spec) {
    if (spec.name == "D_O" || spec.name == "D_A")
        return "{\"name\": " + jsontext::quote(spec.name) +
               ", \"k\": " + std::to_string(spec.num_predictors()) + "}";
    std::string out = "{\"name\": \"custom\", \"columns\": [";
    for (std::size_t j = 0; j < spec.columns.size(); ++j) {
        const auto& c = spec.columns[j];
        if (j) out += ", ";
        switch (c.kind) {
            case ColumnSpec::Kind::kNormal:
                out += "{\"kind\": \"normal\", \"mu\": " + jsontext::g17(c.mu) +
                       ", \"sigma\": " + jsontext::g17(c.sigma) + "}";
                break;
            case ColumnSpec::Kind::kCategorical:
                out += "{\"kind\": \"categorical\", \"levels\": " + jsontext::array(c.levels) +
                       "}";
                break;
            case ColumnSpec::Kind::kProduct:
                out += "{\"kind\": \"product\", \"i\": " + std::to_string(c.factor_a) +
                       ", \"j\": " + std::to_string(c.factor_b) + "}";
                break;
        }
    }
    out += "]}";
    return out;
}

inline DesignSpec design_from_json(const nlohmann::json& j) {
    const std::string name = j.at("name").get<std::string>();
    if (name == "D_O" || name == "D_A") return design_by_name(name, j.at("k").get<std::size_t>());
    DesignSpec spec;
    spec.name = "custom";
    for (const auto& cj : j.at("columns")) {
        const std::string kind = cj.at("kind").get<std::string>();
        if (kind == "normal") {
            spec.columns.push_back(
                ColumnSpec::normal(cj.at("mu").get<double>(), cj.at("sigma").get<double>()));
        } else if (kind == "categorical") {
            spec.columns.push_back(
                ColumnSpec::categorical(cj.at("levels").get<std::vector<double>>()));
        } else if (kind == "product") {
            spec.columns.push_back(ColumnSpec::product(cj.at("i").get<std::size_t>(),
                                                       cj.at("j").get<std::size_t>()));
        } else {
            throw std::invalid_argument("design_from_json: unknown column kind '" + kind + "'");
        }
    }
    spec.validate();
    return spec;
}

inline std::string hypothesis_test_name(Hypothesis::Test t) {
    switch (t) {
        case Hypothesis::Test::kPartialF: return "partial_f";
        case Hypothesis::Test::kWald: return "wald";
        case Hypothesis::Test::kRmAnovaF: return "rm_anova_f";
        case Hypothesis::Test::kT: return "t";
    }
    return "partial_f";
}

inline Hypothesis::Test hypothesis_test_from_name(const std::string& name) {
    if (name == "partial_f") return Hypothesis::Test::kPartialF;
    if (name == "wald") return Hypothesis::Test::kWald;
    if (name == "rm_anova_f") return Hypothesis::Test::kRmAnovaF;
    if (name == "t") return Hypothesis::Test::kT;
    throw std::invalid_argument("unknown hypothesis test '" + name + "'");
}

inline std::string hypothesis_to_json(const Hypothesis& h) {
    std::vector<std::size_t> idx(h.tested_indices.begin(), h.tested_indices.end());
    return "{\"tested_indices\": " + jsontext::array_u64(idx) +
           ", \"test\": " + jsontext::quote(hypothesis_test_name(h.test)) + "}";
}

inline Hypothesis hypothesis_from_json(const nlohmann::json& j) {
    Hypothesis h;
    for (auto v : j.at("tested_indices").get<std::vector<std::size_t>>())
        h.tested_indices.insert(v);
    h.test = hypothesis_test_from_name(j.at("test").get<std::string>());
    return h;
}

// ---------------------------------------------------------------------------
// Points CSV (sampled parameter space, no powers yet)
// ---------------------------------------------------------------------------

inline void write_points_csv(const std::vector<ParameterPoint>& points, std::size_t k,
                             const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_points_csv: cannot open " + path);
    for (std::size_t j = 1; j <= k; ++j) out << "beta_" << j << ",";
    out << "N\n";
    for (const auto& p : points) {
        for (std::size_t j = 0; j < k; ++j) out << jsontext::g10(p.beta[j]) << ",";
        out << p.sample_size << "\n";
    }
}

inline std::vector<ParameterPoint> read_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_points_csv: cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("read_points_csv: empty file");
    std::size_t k = 0;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ','))
            if (col.rfind("beta_", 0) == 0) ++k;
    }
    std::vector<ParameterPoint> points;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        ParameterPoint p;
        p.beta.resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::getline(ss, cell, ',');
            p.beta[j] = std::stod(cell);
        }
        std::getline(ss, cell, ',');
        p.sample_size = std::stol(cell);
        points.push_back(std::move(p));
    }
    return points;
}

// ---------------------------------------------------------------------------
// Dataset CSV: beta_1..k, N, scaled_weight[, pc_1..r], power
// ---------------------------------------------------------------------------

inline std::string dataset_header(std::size_t k, std::size_t r) {
    std::string h;
    for (const auto& name : feature_names(k, r)) h += name + ",";
    h += "power";
    return h;
}

inline std::string dataset_row(const PowerRecord& rec) {
    std::string line;
    for (double b : rec.point.beta) line += jsontext::g10(b) + ",";
    line += std::to_string(rec.point.sample_size) + ",";
    line += jsontext::g10(
        scaled_weight(rec.point.beta, static_cast<double>(rec.point.sample_size)));
    line += "," + jsontext::g10(rec.power);
    return line;
}

inline void write_dataset_csv(const std::vector<PowerRecord>& records, std::size_t k,
                              const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
    out << dataset_header(k, 0) << "\n";
    for (const auto& rec : records) out << dataset_row(rec) << "\n";
}

// Dataset plus the PCA block, for plotting and external consumers.
inline void write_feature_csv(const FeatureBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_feature_csv: cannot open " + path);
    const std::size_t r = bundle.features.cols() - bundle.num_predictors - 2;
    out << dataset_header(bundle.num_predictors, r) << "\n";
    for (std::size_t i = 0; i < bundle.features.rows(); ++i) {
        std::string line;
        for (std::size_t j = 0; j < bundle.features.cols(); ++j) {
            if (j == bundle.num_predictors)
                line += std::to_string(static_cast<long>(bundle.features(i, j)));
            else
                line += jsontext::g10(bundle.features(i, j));
            line += ",";
        }
        line += jsontext::g10(bundle.powers[i]);
        out << line << "\n";
    }
}

struct DatasetCsv {
    std::vector<PowerRecord> records;
    std::size_t num_predictors = 0;
    std::size_t pc_width = 0;  // pc columns present in the file (informational)
};

inline DatasetCsv read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_dataset_csv: cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("read_dataset_csv: empty file");
    DatasetCsv out;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ',')) {
            if (col.rfind("beta_", 0) == 0) ++out.num_predictors;
            if (col.rfind("pc_", 0) == 0) ++out.pc_width;
        }
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        PowerRecord rec;
        rec.point.beta.resize(out.num_predictors);
        for (std::size_t j = 0; j < out.num_predictors; ++j) {
            std::getline(ss, cell, ',');
            rec.point.beta[j] = std::stod(cell);
        }
        std::getline(ss, cell, ',');
        rec.point.sample_size = std::stol(cell);
        std::getline(ss, cell, ',');  // scaled_weight, derived
        for (std::size_t j = 0; j < out.pc_width; ++j) std::getline(ss, cell, ',');
        std::getline(ss, cell, ',');
        rec.power = std::stod(cell);
        out.records.push_back(std::move(rec));
    }
    return out;
}

// Count of complete data rows already present (resume support).
inline std::size_t dataset_rows_on_disk(const std::string& path) {
    std::ifstream in(path);
    if (!in) return 0;
    std::string line;
    if (!std::getline(in, line)) return 0;
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    return rows;
}

// ---------------------------------------------------------------------------
// Manifest (JSON sidecar)
// ---------------------------------------------------------------------------

struct DatasetManifest {
    std::string family = "REG";
    DesignSpec design;
    Hypothesis hypothesis;
    double alpha = 0.05;
    std::size_t sims = 1000;
    std::uint64_t seed = 0;
    std::uint64_t call_count = 0;  // simulation calls embedded in the file
    std::size_t n_points = 0;
    double error_sigma = 1.0;
    std::size_t rmanova_levels_a = 2;
    std::size_t rmanova_levels_b = 2;
    bool has_pca = false;
    PcaModel pca;
    std::size_t feature_width = 0;
};

inline std::string manifest_to_json(const DatasetManifest& m) {
    std::string out = "{\n";
    out += "  \"family\": " + jsontext::quote(m.family) + ",\n";
    out += "  \"design\": " + design_to_json(m.design) + ",\n";
    out += "  \"hypothesis\": " + hypothesis_to_json(m.hypothesis) + ",\n";
    out += "  \"alpha\": " + jsontext::g17(m.alpha) + ",\n";
    out += "  \"sims\": " + std::to_string(m.sims) + ",\n";
    out += "  \"seed\": " + std::to_string(m.seed) + ",\n";
    out += "  \"call_count\": " + std::to_string(m.call_count) + ",\n";
    out += "  \"n_points\": " + std::to_string(m.n_points) + ",\n";
    out += "  \"error_sigma\": " + jsontext::g17(m.error_sigma) + ",\n";
    out += "  \"rmanova_levels\": [" + std::to_string(m.rmanova_levels_a) + "," +
           std::to_string(m.rmanova_levels_b) + "],\n";
    out += "  \"feature_width\": " + std::to_string(m.feature_width) + ",\n";
    out += "  \"pca\": " + (m.has_pca ? detail::pca_to_json(m.pca) : std::string("null")) + "\n";
    out += "}\n";
    return out;
}

inline DatasetManifest manifest_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    DatasetManifest m;
    m.family = j.at("family").get<std::string>();
    m.design = design_from_json(j.at("design"));
    m.hypothesis = hypothesis_from_json(j.at("hypothesis"));
    m.alpha = j.at("alpha").get<double>();
    m.sims = j.at("sims").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.call_count = j.at("call_count").get<std::uint64_t>();
    m.n_points = j.at("n_points").get<std::size_t>();
    m.error_sigma = j.at("error_sigma").get<double>();
    m.rmanova_levels_a = j.at("rmanova_levels").at(0).get<std::size_t>();
    m.rmanova_levels_b = j.at("rmanova_levels").at(1).get<std::size_t>();
    m.feature_width = j.at("feature_width").get<std::size_t>();
    if (!j.at("pca").is_null()) {
        m.has_pca = true;
        m.pca = detail::pca_from_json(j.at("pca"));
    }
    return m;
}

inline void save_text(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_text: cannot open " + path);
    out << text;
}

inline std::string load_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_text: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace powermap
