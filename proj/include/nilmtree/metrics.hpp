#pragma once

#include <string>
#include <vector>

namespace nilmtree {

// Fractional per-sample detection credit. With truth x and estimate xh:
//   tp = min(x, xh) / xh   fp = max(0, xh - x) / xh   fn = max(0, x - xh) / x
// A zero denominator zeroes that term: xh == 0 gives tp = fp = 0, x == 0 gives fn = 0.
struct Credit {
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
};

Credit sample_credit(double truth, double estimate);

struct DeviceScore {
    std::string device;
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
    double nde = 0.0;
    double tp = 0.0;  // summed credits, kept for the micro aggregate
    double fp = 0.0;
    double fn = 0.0;
};

struct ScoreReport {
    std::vector<DeviceScore> devices;
    double macro_precision = 0.0;  // mean of per-device values
    double macro_recall = 0.0;
    double macro_f = 0.0;
    double macro_nde = 0.0;
    double micro_precision = 0.0;  // from credits pooled across devices
    double micro_recall = 0.0;
    double micro_f = 0.0;
    double overall_nde = 0.0;  // sum of squared errors over sum of squared truth, all devices
};

// precision = tp/(tp+fp), recall = tp/(tp+fn), f = 2pr/(p+r); 0/0 cases evaluate to 0.
double precision_of(double tp, double fp);
double recall_of(double tp, double fn);
double f_of(double precision, double recall);

// Normalized disaggregation error: sum((xh-x)^2) / sum(x^2). Errors if the truth is all zero.
double nde(const std::vector<double>& truth, const std::vector<double>& estimate);

// Scores one device channel; truth and estimate must be the same length.
DeviceScore score_device(const std::string& name, const std::vector<double>& truth,
                         const std::vector<double>& estimate);

// Scores a full run. truth[d] and estimates[d] follow the device order in names.
ScoreReport score_all(const std::vector<std::string>& names,
                      const std::vector<std::vector<double>>& truth,
                      const std::vector<std::vector<double>>& estimates);

// CSV: device,precision,recall,f,nde rows, then an "average" (macro) and a "micro" row.
void write_report_csv(const ScoreReport& report, const std::string& path);
// Same content as an aligned text table.
void write_report_txt(const ScoreReport& report, const std::string& path);
std::string format_report(const ScoreReport& report);

}  // namespace nilmtree
