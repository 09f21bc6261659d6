#include "mbclust/report.hpp"

#include "mbclust/errors.hpp"
#include "mbclust/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace mbclust {

namespace {

std::string fixed(double value, int digits) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
    return buffer;
}

std::string cell(const std::optional<double>& value, int digits = 6) {
    return value ? fixed(*value, digits) : std::string("NA");
}

nlohmann::json json_value(const std::optional<double>& value) {
    if (!value || !std::isfinite(*value)) return nullptr;
    return *value;
}

std::string csv_escape(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (const char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

std::string wilcoxon_cell(const MethodSummary& s) {
    switch (s.wilcoxon) {
        case WilcoxonStatus::Reference: return "reference";
        case WilcoxonStatus::Insufficient: return "insufficient";
        case WilcoxonStatus::Computed: return fixed(s.wilcoxon_p, 6);
        case WilcoxonStatus::NotRequested: break;
    }
    return "NA";
}

}  // namespace

MetricStats describe(const std::vector<double>& values) {
    MetricStats out;
    out.count = static_cast<int>(values.size());
    if (values.empty()) return out;
    double sum = 0.0;
    for (const double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double squares = 0.0;
    for (const double v : values) squares += (v - mean) * (v - mean);
    out.mean = mean;
    out.std = values.size() > 1 ? std::sqrt(squares / static_cast<double>(values.size() - 1)) : 0.0;
    return out;
}

std::vector<MethodSummary> summarize(const std::vector<RunRecord>& records,
                                     const std::optional<std::string>& reference) {
    if (records.empty()) throw InvalidState("report: no run records");

    std::map<std::string, std::vector<const RunRecord*>> by_method;
    for (const auto& record : records) by_method[record.method].push_back(&record);
    for (auto& [method, group] : by_method) {
        std::stable_sort(group.begin(), group.end(),
                         [](const RunRecord* a, const RunRecord* b) { return a->seed < b->seed; });
    }

    auto ari_by_seed = [](const std::vector<const RunRecord*>& group) {
        std::map<std::uint64_t, double> out;
        for (const auto* r : group) {
            if (!r->failed && r->ari) out.emplace(r->seed, *r->ari);
        }
        return out;
    };
    std::optional<std::map<std::uint64_t, double>> reference_ari;
    if (reference) {
        const auto it = by_method.find(*reference);
        reference_ari = it == by_method.end() ? std::map<std::uint64_t, double>{} : ari_by_seed(it->second);
    }

    std::vector<MethodSummary> out;
    for (const auto& [method, group] : by_method) {
        MethodSummary s;
        s.method = method;
        s.runs = static_cast<int>(group.size());
        std::vector<double> ari_values, nmi_values, ci_values, fitness_values, times;
        for (const auto* r : group) {
            if (r->failed) {
                ++s.failed;
                continue;
            }
            if (r->ari) ari_values.push_back(*r->ari);
            if (r->nmi) nmi_values.push_back(*r->nmi);
            if (r->ci) ci_values.push_back(static_cast<double>(*r->ci));
            fitness_values.push_back(r->fitness);
            times.push_back(r->wall_time_seconds);
        }
        s.ari = describe(ari_values);
        s.nmi = describe(nmi_values);
        s.ci = describe(ci_values);
        s.fitness = describe(fitness_values);
        s.wall_time = describe(times);

        if (reference_ari) {
            if (method == *reference) {
                s.wilcoxon = WilcoxonStatus::Reference;
            } else {
                std::vector<double> x, y;
                for (const auto& [seed, value] : ari_by_seed(group)) {
                    const auto match = reference_ari->find(seed);
                    if (match == reference_ari->end()) continue;
                    x.push_back(value);
                    y.push_back(match->second);
                }
                try {
                    s.wilcoxon_p = wilcoxon_signed_rank(x, y);
                    s.wilcoxon = WilcoxonStatus::Computed;
                } catch (const InsufficientData&) {
                    s.wilcoxon = WilcoxonStatus::Insufficient;
                }
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw InvalidParameter("unknown report format '" + std::string(name) + "'");
}

void emit_report(const std::vector<RunRecord>& records, ReportFormat format, std::ostream& out,
                 const std::optional<std::string>& reference) {
    const std::vector<MethodSummary> summaries = summarize(records, reference);

    if (format == ReportFormat::Csv) {
        out << "method,runs,failed,ari_mean,ari_std,nmi_mean,nmi_std,ci_mean,ci_std,fitness_mean,time_mean";
        if (reference) out << ",wilcoxon_p_ari";
        out << '\n';
        for (const auto& s : summaries) {
            out << csv_escape(s.method) << ',' << s.runs << ',' << s.failed << ',' << cell(s.ari.mean) << ','
                << cell(s.ari.std) << ',' << cell(s.nmi.mean) << ',' << cell(s.nmi.std) << ',' << cell(s.ci.mean)
                << ',' << cell(s.ci.std) << ',' << cell(s.fitness.mean, 4) << ',' << cell(s.wall_time.mean, 4);
            if (reference) out << ',' << wilcoxon_cell(s);
            out << '\n';
        }
        return;
    }

    nlohmann::json doc;
    doc["reference"] = reference ? nlohmann::json(*reference) : nlohmann::json(nullptr);
    doc["methods"] = nlohmann::json::array();
    for (const auto& s : summaries) {
        auto stats = [](const MetricStats& m) {
            return nlohmann::json{{"mean", json_value(m.mean)}, {"std", json_value(m.std)}, {"count", m.count}};
        };
        nlohmann::json entry{{"method", s.method},        {"runs", s.runs},
                             {"failed", s.failed},        {"ari", stats(s.ari)},
                             {"nmi", stats(s.nmi)},       {"ci", stats(s.ci)},
                             {"fitness", stats(s.fitness)}, {"time_seconds", stats(s.wall_time)}};
        if (reference) {
            entry["wilcoxon_p_ari"] = s.wilcoxon == WilcoxonStatus::Computed ? nlohmann::json(s.wilcoxon_p)
                                                                             : nlohmann::json(wilcoxon_cell(s));
        }
        doc["methods"].push_back(std::move(entry));
    }
    out << doc.dump(2) << '\n';
}

void emit_records_csv(const std::vector<RunRecord>& records, std::ostream& out) {
    out << "method,seed,failed,fitness,ari,nmi,ci,time_seconds,local_searches,error\n";
    for (const auto& r : records) {
        out << csv_escape(r.method) << ',' << r.seed << ',' << (r.failed ? 1 : 0) << ','
            << (r.failed ? std::string("NA") : fixed(r.fitness, 6)) << ',' << cell(r.failed ? std::nullopt : r.ari, 10)
            << ',' << cell(r.failed ? std::nullopt : r.nmi, 10) << ','
            << (r.ci && !r.failed ? std::to_string(*r.ci) : std::string("NA")) << ','
            << fixed(r.wall_time_seconds, 4) << ',' << r.local_searches << ',' << csv_escape(r.error) << '\n';
    }
}

}  // namespace mbclust
