#include "dipgnn/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dipgnn/errors.hpp"

namespace dipgnn {

namespace {

constexpr const char* kHeader =
    "step,gen_edge_loss,gen_feat_loss,disc_edge_loss,disc_feat_loss,total_loss,"
    "gen_acc,disc_acc,cov_gen,cov_dis,cov_dis_recount,"
    "sub_nodes,sub_edges,masked_edges,masked_correct,seed_nodes";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(const std::string& path, const std::vector<StepMetrics>& rows,
                       const std::string& config_digest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("metrics: cannot open '" + path + "' for writing");
  out << "# schema=dipgnn-metrics-v1 config=" << config_digest << '\n';
  out << kHeader << '\n';
  for (const auto& r : rows) {
    out << r.step << ',' << fmt(r.gen_edge_loss) << ',' << fmt(r.gen_feat_loss) << ','
        << fmt(r.disc_edge_loss) << ',' << fmt(r.disc_feat_loss) << ',' << fmt(r.total_loss)
        << ',' << fmt(r.gen_acc) << ',' << fmt(r.disc_acc) << ',' << fmt(r.cov_gen) << ','
        << fmt(r.cov_dis) << ',' << fmt(r.cov_dis_recount) << ',' << r.sub_nodes << ','
        << r.sub_edges << ',' << r.masked_edges << ',' << r.masked_correct << ','
        << r.seed_nodes << '\n';
  }
  if (!out) throw DataError("metrics: write failed for '" + path + "'");
}

std::vector<StepMetrics> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("metrics: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# schema=dipgnn-metrics-v1", 0) != 0) {
    throw DataError("metrics: '" + path + "' is missing the schema line");
  }
  if (!std::getline(in, line) || line != kHeader) {
    throw DataError("metrics: '" + path + "' has an unexpected column header");
  }
  std::vector<StepMetrics> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 16) throw DataError("metrics: malformed row in '" + path + "'");
    StepMetrics r;
    r.step = std::stoi(cells[0]);
    r.gen_edge_loss = std::stod(cells[1]);
    r.gen_feat_loss = std::stod(cells[2]);
    r.disc_edge_loss = std::stod(cells[3]);
    r.disc_feat_loss = std::stod(cells[4]);
    r.total_loss = std::stod(cells[5]);
    r.gen_acc = std::stod(cells[6]);
    r.disc_acc = std::stod(cells[7]);
    r.cov_gen = std::stod(cells[8]);
    r.cov_dis = std::stod(cells[9]);
    r.cov_dis_recount = std::stod(cells[10]);
    r.sub_nodes = std::stoi(cells[11]);
    r.sub_edges = std::stoi(cells[12]);
    r.masked_edges = std::stoi(cells[13]);
    r.masked_correct = std::stoi(cells[14]);
    r.seed_nodes = std::stoi(cells[15]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dipgnn
