#include "monosurv/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "monosurv/rng.hpp"

namespace monosurv {

ToyKind parse_toy_kind(const std::string& name) {
    if (name == "weibull") return ToyKind::Weibull;
    if (name == "normal") return ToyKind::Normal;
    if (name == "checkerboard") return ToyKind::Checkerboard;
    throw UsageError("unknown toy dataset kind '" + name + "' (expected weibull, normal or checkerboard)");
}

std::string toy_kind_name(ToyKind kind) {
    switch (kind) {
        case ToyKind::Weibull: return "weibull";
        case ToyKind::Normal: return "normal";
        case ToyKind::Checkerboard: return "checkerboard";
    }
    return "?";
}

Dataset simulate_toy(ToyKind kind, int n, std::uint64_t seed, bool keep_latents) {
    if (n < 1) {
        throw UsageError("simulate_toy: n must be at least 1");
    }
    Rng rng(derive_seed(seed, 0x5157u));
    Dataset out;
    out.covariate_names = {"x"};
    out.provenance = toy_kind_name(kind) + ":seed=" + std::to_string(seed);
    out.records.reserve(static_cast<std::size_t>(n));
    if (keep_latents) {
        out.latent_event_time.reserve(static_cast<std::size_t>(n));
        out.latent_censor_time.reserve(static_cast<std::size_t>(n));
    }
    for (int i = 0; i < n; ++i) {
        const double x = rng.u01();
        double t = 0.0, c = 0.0;
        switch (kind) {
            case ToyKind::Weibull:
                t = rng.weibull(2.0 + 6.0 * x);
                c = rng.exponential(1.5);
                break;
            case ToyKind::Normal:
                t = std::max(rng.normal(100.0, std::max(6.0 * x, 1e-3)), 0.0);
                c = std::max(rng.normal(100.0, 6.0), 0.0);
                break;
            case ToyKind::Checkerboard: {
                // 4 columns x 6 rows on [0,1]^2; odd columns draw T uniformly
                // from rows {1,3,5}, even columns from rows {2,4,6}.
                const int col = std::min(static_cast<int>(x * 4.0), 3);
                const int step = static_cast<int>(rng.uniform_int(0, 2));
                const int row = (col % 2 == 0) ? 2 * step : 2 * step + 1;
                t = rng.uniform(row / 6.0, (row + 1) / 6.0);
                c = rng.exponential(1.5);
                break;
            }
        }
        SurvivalRecord rec;
        rec.covariates = {x};
        rec.duration = std::min(t, c);
        rec.event = (t <= c) ? 1 : 0;
        out.records.push_back(std::move(rec));
        if (keep_latents) {
            out.latent_event_time.push_back(t);
            out.latent_censor_time.push_back(c);
        }
    }
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_number(const std::string& text, int row, const std::string& column) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0')) {
        throw ParseError("non-numeric value '" + text + "' at row " + std::to_string(row) +
                         ", column '" + column + "'");
    }
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& duration_column,
                 const std::string& event_column) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open file '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("file '" + path + "' is empty (missing header row)");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);
    int duration_idx = -1, event_idx = -1;
    Dataset out;
    std::vector<int> covariate_cols;
    for (int j = 0; j < static_cast<int>(header.size()); ++j) {
        if (header[j] == duration_column) {
            duration_idx = j;
        } else if (header[j] == event_column) {
            event_idx = j;
        } else {
            covariate_cols.push_back(j);
            out.covariate_names.push_back(header[j]);
        }
    }
    if (duration_idx < 0) {
        throw ParseError("file '" + path + "' has no column named '" + duration_column + "'");
    }
    if (event_idx < 0) {
        throw ParseError("file '" + path + "' has no column named '" + event_column + "'");
    }
    out.provenance = path;
    int row = 1;  // header row
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(header.size()));
        }
        SurvivalRecord rec;
        rec.duration = parse_number(fields[static_cast<std::size_t>(duration_idx)], row, duration_column);
        const double event_value = parse_number(fields[static_cast<std::size_t>(event_idx)], row, event_column);
        if (event_value != 0.0 && event_value != 1.0) {
            throw ParseError("event value '" + fields[static_cast<std::size_t>(event_idx)] +
                             "' at row " + std::to_string(row) + " is not 0 or 1");
        }
        if (!(rec.duration >= 0.0) || !std::isfinite(rec.duration)) {
            throw ParseError("duration at row " + std::to_string(row) + " must be finite and non-negative");
        }
        rec.event = static_cast<int>(event_value);
        rec.covariates.reserve(covariate_cols.size());
        for (const int j : covariate_cols) {
            rec.covariates.push_back(parse_number(fields[static_cast<std::size_t>(j)], row, header[static_cast<std::size_t>(j)]));
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

void save_csv(const Dataset& data, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw InputError("cannot write file '" + tmp + "'");
        }
        for (const auto& name : data.covariate_names) {
            out << name << ',';
        }
        out << "duration,event\n";
        char buf[40];
        for (const auto& rec : data.records) {
            for (const double v : rec.covariates) {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                out << buf << ',';
            }
            std::snprintf(buf, sizeof(buf), "%.17g", rec.duration);
            out << buf << ',' << rec.event << '\n';
        }
        if (!out) {
            throw InputError("failed while writing '" + tmp + "'");
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw InputError("cannot move '" + tmp + "' to '" + path + "'");
    }
}

Preprocessing fit_preprocess(const Dataset& train) {
    if (train.records.empty()) {
        throw UsageError("fit_preprocess: training set is empty");
    }
    const int p = train.covariate_dim();
    const double n = static_cast<double>(train.records.size());
    Preprocessing prep;
    prep.covariate_mean.assign(static_cast<std::size_t>(p), 0.0);
    prep.covariate_sd.assign(static_cast<std::size_t>(p), 0.0);
    for (const auto& rec : train.records) {
        if (static_cast<int>(rec.covariates.size()) != p) {
            throw InputError("fit_preprocess: inconsistent covariate dimension");
        }
        for (int j = 0; j < p; ++j) {
            prep.covariate_mean[static_cast<std::size_t>(j)] += rec.covariates[static_cast<std::size_t>(j)];
        }
    }
    for (int j = 0; j < p; ++j) {
        prep.covariate_mean[static_cast<std::size_t>(j)] /= n;
    }
    for (const auto& rec : train.records) {
        for (int j = 0; j < p; ++j) {
            const double delta = rec.covariates[static_cast<std::size_t>(j)] - prep.covariate_mean[static_cast<std::size_t>(j)];
            prep.covariate_sd[static_cast<std::size_t>(j)] += delta * delta;
        }
    }
    double max_duration = 0.0;
    for (const auto& rec : train.records) {
        max_duration = std::max(max_duration, rec.duration);
    }
    for (int j = 0; j < p; ++j) {
        prep.covariate_sd[static_cast<std::size_t>(j)] =
            std::max(std::sqrt(prep.covariate_sd[static_cast<std::size_t>(j)] / n), 1e-12);
    }
    prep.duration_scale = max_duration > 0.0 ? max_duration : 1.0;
    return prep;
}

StandardizedData apply_preprocess(const Preprocessing& prep, const Dataset& data) {
    const int p = static_cast<int>(prep.covariate_mean.size());
    StandardizedData out;
    out.n = static_cast<int>(data.records.size());
    out.p = p;
    out.x.resize(static_cast<std::size_t>(out.n) * p);
    out.z.resize(static_cast<std::size_t>(out.n));
    out.d.resize(static_cast<std::size_t>(out.n));
    for (int i = 0; i < out.n; ++i) {
        const SurvivalRecord& rec = data.records[static_cast<std::size_t>(i)];
        if (static_cast<int>(rec.covariates.size()) != p) {
            throw InputError("apply_preprocess: record " + std::to_string(i) + " has covariate dimension " +
                             std::to_string(rec.covariates.size()) + ", expected " + std::to_string(p));
        }
        for (int j = 0; j < p; ++j) {
            out.x[static_cast<std::size_t>(i) * p + j] =
                (rec.covariates[static_cast<std::size_t>(j)] - prep.covariate_mean[static_cast<std::size_t>(j)]) /
                prep.covariate_sd[static_cast<std::size_t>(j)];
        }
        out.z[static_cast<std::size_t>(i)] = rec.duration / prep.duration_scale;
        out.d[static_cast<std::size_t>(i)] = rec.event;
    }
    return out;
}

std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed) {
    if (k < 2) {
        throw UsageError("kfold_split: k must be at least 2");
    }
    if (n < k) {
        throw UsageError("kfold_split: n=" + std::to_string(n) + " is smaller than k=" + std::to_string(k));
    }
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 0xF01Du));
    rng.shuffle(perm);
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
    const int base = n / k;
    const int extra = n % k;
    int pos = 0;
    for (int f = 0; f < k; ++f) {
        const int len = base + (f < extra ? 1 : 0);
        folds[static_cast<std::size_t>(f)].assign(perm.begin() + pos, perm.begin() + pos + len);
        pos += len;
    }
    return folds;
}

FoldRound fold_round(const std::vector<std::vector<int>>& folds, int round) {
    const int k = static_cast<int>(folds.size());
    if (round < 0 || round >= k) {
        throw UsageError("fold_round: round out of range");
    }
    FoldRound out;
    out.test = folds[static_cast<std::size_t>(round)];
    out.validation = folds[static_cast<std::size_t>((round + 1) % k)];
    for (int f = 0; f < k; ++f) {
        if (f == round || f == (round + 1) % k) continue;
        out.train.insert(out.train.end(), folds[static_cast<std::size_t>(f)].begin(), folds[static_cast<std::size_t>(f)].end());
    }
    return out;
}

Dataset subset(const Dataset& data, std::span<const int> indices) {
    Dataset out;
    out.covariate_names = data.covariate_names;
    out.provenance = data.provenance;
    out.records.reserve(indices.size());
    for (const int i : indices) {
        out.records.push_back(data.records.at(static_cast<std::size_t>(i)));
    }
    return out;
}

}  // namespace monosurv
