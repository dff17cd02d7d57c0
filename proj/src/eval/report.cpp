#include <charconv>
#include <fstream>

#include "activeview/eval/eval.hpp"

namespace activeview {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_csv(dir / "curve.csv");
    out << "step,mean_acc,std\n";
    for (Index t = 0; t < report.curve.mean.size(); ++t)
      out << (t + 1) << ',' << format_double(report.curve.mean(t)) << ',' << format_double(report.curve.std(t)) << '\n';
  }
  {
    auto out = open_csv(dir / "metrics.csv");
    out << "name,value\n";
    out << "mode," << report.mode << '\n';
    out << "mAcc," << format_double(report.scores.macc) << '\n';
    out << "w-mAcc," << format_double(report.scores.wmacc) << '\n';
    out << "Step2-Acc," << format_double(report.scores.step2) << '\n';
    out << "seeds," << report.curve.seeds << '\n';
    for (std::size_t t = 0; t < report.exit_histogram.size(); ++t)
      out << "exit_fraction_step" << (t + 1) << ',' << format_double(report.exit_histogram[t]) << '\n';
  }
  if (!report.exit_curve.empty()) {
    auto out = open_csv(dir / "exit.csv");
    out << "target_step,mean_step,acc\n";
    for (const auto& p : report.exit_curve)
      out << format_double(p.target) << ',' << format_double(p.mean_step) << ',' << format_double(p.accuracy) << '\n';
  }
  if (report.upper) {
    auto out = open_csv(dir / "upper_bound.csv");
    out << "step,acc\n";
    for (Index t = 0; t < report.upper->size(); ++t) out << (t + 1) << ',' << format_double((*report.upper)(t)) << '\n';
  }
  if (report.view_matrix) {
    auto out = open_csv(dir / "view_matrix.csv");
    out << "view,class,acc\n";
    const MatrixXd& m = *report.view_matrix;
    for (Index v = 0; v < m.rows(); ++v)
      for (Index c = 0; c < m.cols(); ++c) out << v << ',' << c << ',' << format_double(m(v, c)) << '\n';
  }
}

}  // namespace activeview
