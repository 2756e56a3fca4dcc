#include "nilmtree/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nilmtree/errors.hpp"
#include "nilmtree/util.hpp"

namespace nilmtree {

Credit sample_credit(double truth, double estimate) {
    Credit c;
    if (estimate > 0.0) {
        c.tp = std::min(truth, estimate) / estimate;
        c.fp = std::max(0.0, estimate - truth) / estimate;
    }
    if (truth > 0.0) c.fn = std::max(0.0, truth - estimate) / truth;
    return c;
}

double precision_of(double tp, double fp) {
    double den = tp + fp;
    return den > 0.0 ? tp / den : 0.0;
}

double recall_of(double tp, double fn) {
    double den = tp + fn;
    return den > 0.0 ? tp / den : 0.0;
}

double f_of(double precision, double recall) {
    double den = precision + recall;
    return den > 0.0 ? 2.0 * precision * recall / den : 0.0;
}

double nde(const std::vector<double>& truth, const std::vector<double>& estimate) {
    if (truth.size() != estimate.size()) throw DataError("nde: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        double e = estimate[i] - truth[i];
        num += e * e;
        den += truth[i] * truth[i];
    }
    if (den == 0.0) throw DataError("nde: truth signal is identically zero");
    return num / den;
}

DeviceScore score_device(const std::string& name, const std::vector<double>& truth,
                         const std::vector<double>& estimate) {
    if (truth.size() != estimate.size())
        throw DataError("score: channel '" + name + "' length mismatch");
    if (truth.empty()) throw DataError("score: channel '" + name + "' is empty");
    DeviceScore s;
    s.device = name;
    double sq_err = 0.0, sq_truth = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        Credit c = sample_credit(truth[i], estimate[i]);
        s.tp += c.tp;
        s.fp += c.fp;
        s.fn += c.fn;
        double e = estimate[i] - truth[i];
        sq_err += e * e;
        sq_truth += truth[i] * truth[i];
    }
    s.precision = precision_of(s.tp, s.fp);
    s.recall = recall_of(s.tp, s.fn);
    s.f = f_of(s.precision, s.recall);
    s.nde = sq_truth > 0.0 ? sq_err / sq_truth : 0.0;
    return s;
}

ScoreReport score_all(const std::vector<std::string>& names,
                      const std::vector<std::vector<double>>& truth,
                      const std::vector<std::vector<double>>& estimates) {
    if (names.empty()) throw DataError("score: no devices");
    if (truth.size() != names.size() || estimates.size() != names.size())
        throw DataError("score: device count mismatch");
    ScoreReport r;
    double tp = 0.0, fp = 0.0, fn = 0.0, sq_err = 0.0, sq_truth = 0.0;
    for (std::size_t d = 0; d < names.size(); ++d) {
        DeviceScore s = score_device(names[d], truth[d], estimates[d]);
        tp += s.tp;
        fp += s.fp;
        fn += s.fn;
        r.macro_precision += s.precision;
        r.macro_recall += s.recall;
        r.macro_nde += s.nde;
        for (std::size_t i = 0; i < truth[d].size(); ++i) {
            double e = estimates[d][i] - truth[d][i];
            sq_err += e * e;
            sq_truth += truth[d][i] * truth[d][i];
        }
        r.devices.push_back(std::move(s));
    }
    double n = static_cast<double>(names.size());
    r.macro_precision /= n;
    r.macro_recall /= n;
    r.macro_nde /= n;
    r.macro_f = f_of(r.macro_precision, r.macro_recall);
    r.micro_precision = precision_of(tp, fp);
    r.micro_recall = recall_of(tp, fn);
    r.micro_f = f_of(r.micro_precision, r.micro_recall);
    r.overall_nde = sq_truth > 0.0 ? sq_err / sq_truth : 0.0;
    return r;
}

namespace {

std::string fixed6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void write_report_csv(const ScoreReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "device,precision,recall,f,nde\n";
    for (const auto& d : report.devices)
        out << d.device << ',' << fixed6(d.precision) << ',' << fixed6(d.recall) << ','
            << fixed6(d.f) << ',' << fixed6(d.nde) << '\n';
    out << "average," << fixed6(report.macro_precision) << ',' << fixed6(report.macro_recall) << ','
        << fixed6(report.macro_f) << ',' << fixed6(report.macro_nde) << '\n';
    out << "micro," << fixed6(report.micro_precision) << ',' << fixed6(report.micro_recall) << ','
        << fixed6(report.micro_f) << ',' << fixed6(report.overall_nde) << '\n';
}

std::string format_report(const ScoreReport& report) {
    std::size_t name_w = 7;  // fits "average"
    for (const auto& d : report.devices) name_w = std::max(name_w, d.device.size());
    std::ostringstream out;
    auto row = [&](const std::string& name, double p, double r, double f, double e) {
        out << name;
        out << std::string(name_w - name.size(), ' ');
        out << "  " << fixed6(p) << "  " << fixed6(r) << "  " << fixed6(f) << "  " << fixed6(e)
            << '\n';
    };
    out << std::string(name_w, ' ') << "  precision  recall    f         nde\n";
    for (const auto& d : report.devices) row(d.device, d.precision, d.recall, d.f, d.nde);
    row("average", report.macro_precision, report.macro_recall, report.macro_f, report.macro_nde);
    row("micro", report.micro_precision, report.micro_recall, report.micro_f, report.overall_nde);
    return out.str();
}

void write_report_txt(const ScoreReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << format_report(report);
}

}  // namespace nilmtree
