#include "locscale/store.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace locscale {

namespace fs = std::filesystem;
using nlohmann::json;

std::string RunManifest::to_json() const {
  json j;
  j["sweeps"] = sweeps;
  j["burn"] = burn;
  j["thin"] = thin;
  j["seed"] = seed;
  j["retained"] = retained;
  j["formula"] = formula;
  j["priors"] = priors;
  j["generator"] = generator;
  j["data"] = {{"rows", data_rows},
               {"cols", data_cols},
               {"hash", data_hash},
               {"dropped_rows", dropped_rows}};
  j["n"] = n;
  j["p1"] = p1;
  j["p2"] = p2;
  j["store_dir"] = store_dir;
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["tuning"] = {{"h", tuning_h}, {"f2", tuning_f2}, {"g2", tuning_g2}};
  j["acceptance"] = acceptance;
  j["max_abs_colsum_z_alpha"] = max_abs_colsum_z_alpha;
  j["columns"] = columns;
  return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
  const json j = json::parse(text);
  RunManifest m;
  m.sweeps = j.at("sweeps").get<long>();
  m.burn = j.at("burn").get<long>();
  m.thin = j.at("thin").get<long>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.retained = j.at("retained").get<long>();
  m.formula = j.at("formula").get<std::string>();
  m.priors = j.at("priors").get<std::map<std::string, std::string>>();
  m.generator = j.at("generator").get<std::string>();
  m.data_rows = j.at("data").at("rows").get<long>();
  m.data_cols = j.at("data").at("cols").get<long>();
  m.data_hash = j.at("data").at("hash").get<std::string>();
  m.dropped_rows = j.at("data").at("dropped_rows").get<int>();
  m.n = j.at("n").get<int>();
  m.p1 = j.at("p1").get<int>();
  m.p2 = j.at("p2").get<int>();
  m.store_dir = j.at("store_dir").get<std::string>();
  m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  m.tuning_h = j.at("tuning").at("h").get<double>();
  m.tuning_f2 = j.at("tuning").at("f2").get<double>();
  m.tuning_g2 = j.at("tuning").at("g2").get<double>();
  m.acceptance = j.at("acceptance").get<std::map<std::string, double>>();
  m.max_abs_colsum_z_alpha = j.at("max_abs_colsum_z_alpha").get<double>();
  m.columns = j.at("columns").get<std::map<std::string, std::vector<std::string>>>();
  return m;
}

SampleStore::SampleStore(std::string directory) : dir_(std::move(directory)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (!fs::is_directory(dir_))
    throw std::runtime_error("storage directory cannot be created: " + dir_);
  for (const auto& name : store_parameter_names()) {
    const std::string path = (fs::path(dir_) / (name + ".txt")).string();
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) {
      for (auto* open : files_)
        if (open) std::fclose(open);
      throw std::runtime_error("storage directory is not writable: " + path);
    }
    files_.push_back(f);
  }
}

SampleStore::~SampleStore() {
  for (auto* f : files_)
    if (f) std::fclose(f);
}

namespace {

void put_double(std::FILE* f, double v, bool first) {
  if (!first) std::fputc(' ', f);
  std::fprintf(f, "%.17g", v);
}

void put_bits(std::FILE* f, const std::vector<std::uint8_t>& bits) {
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (i) std::fputc(' ', f);
    std::fputc(bits[i] ? '1' : '0', f);
  }
  std::fputc('\n', f);
}

void put_vector(std::FILE* f, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put_double(f, v(i), i == 0);
  std::fputc('\n', f);
}

}  // namespace

void SampleStore::write_sweep(const Eigen::VectorXd& beta, const std::vector<std::uint8_t>& gamma,
                              const Eigen::VectorXd& alpha, const std::vector<std::uint8_t>& delta,
                              double c_beta, double c_alpha, double sigma2) {
  put_vector(files_[0], beta);
  put_bits(files_[1], gamma);
  put_vector(files_[2], alpha);
  put_bits(files_[3], delta);
  put_double(files_[4], c_beta, true);
  std::fputc('\n', files_[4]);
  put_double(files_[5], c_alpha, true);
  std::fputc('\n', files_[5]);
  put_double(files_[6], sigma2, true);
  std::fputc('\n', files_[6]);
  ++lines_;
  for (auto* f : files_) {
    if (std::ferror(f)) throw std::runtime_error("I/O failure while writing samples in " + dir_);
  }
}

void SampleStore::finalize(const RunManifest& manifest) {
  for (auto* f : files_) {
    if (std::fflush(f) != 0) throw std::runtime_error("I/O failure finalizing store in " + dir_);
  }
  std::ofstream out(fs::path(dir_) / "manifest.json");
  out << manifest.to_json() << "\n";
  if (!out) throw std::runtime_error("cannot write manifest in " + dir_);
}

RunManifest read_manifest(const std::string& store_dir) {
  std::ifstream in(fs::path(store_dir) / "manifest.json");
  if (!in) throw std::runtime_error("missing manifest.json in " + store_dir);
  std::stringstream ss;
  ss << in.rdbuf();
  return RunManifest::from_json(ss.str());
}

SampleMatrix read_parameter(const std::string& store_dir, const std::string& name) {
  const auto& names = store_parameter_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw std::runtime_error("unknown parameter file: " + name);
  const RunManifest manifest = read_manifest(store_dir);
  const auto it = manifest.columns.find(name);
  if (it == manifest.columns.end())
    throw std::runtime_error("manifest lacks column labels for " + name);
  const auto n_cols = static_cast<Eigen::Index>(it->second.size());

  std::ifstream in(fs::path(store_dir) / (name + ".txt"));
  if (!in) throw std::runtime_error("missing sample file: " + name + ".txt in " + store_dir);
  SampleMatrix out;
  out.labels = it->second;
  std::vector<double> buffer;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::stringstream ss(line);
    double v;
    Eigen::Index got = 0;
    while (ss >> v) {
      buffer.push_back(v);
      ++got;
    }
    if (got != n_cols)
      throw std::runtime_error(name + ".txt line " + std::to_string(lineno) + ": expected " +
                               std::to_string(n_cols) + " fields, got " + std::to_string(got));
  }
  if (lineno != manifest.retained)
    throw std::runtime_error(name + ".txt has " + std::to_string(lineno) + " lines but manifest says " +
                             std::to_string(manifest.retained));
  out.values.resize(lineno, n_cols);
  for (long i = 0; i < lineno; ++i)
    for (Eigen::Index j = 0; j < n_cols; ++j)
      out.values(i, j) = buffer[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_cols) +
                                static_cast<std::size_t>(j)];
  return out;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::runtime_error("quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double h = p * (static_cast<double>(v.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

std::vector<ColumnSummary> chain_summary(const SampleMatrix& samples) {
  const Eigen::Index s = samples.values.rows();
  if (s < 2) throw std::runtime_error("chain summary needs at least 2 retained sweeps");
  std::vector<ColumnSummary> out;
  const auto n_batches = static_cast<Eigen::Index>(std::floor(std::sqrt(static_cast<double>(s))));
  const Eigen::Index batch_size = s / n_batches;
  for (Eigen::Index j = 0; j < samples.values.cols(); ++j) {
    ColumnSummary cs;
    cs.label = samples.labels[static_cast<std::size_t>(j)];
    const auto col = samples.values.col(j);
    cs.mean = col.mean();
    cs.sd = std::sqrt((col.array() - cs.mean).square().sum() / static_cast<double>(s - 1));
    cs.naive_se = cs.sd / std::sqrt(static_cast<double>(s));
    // Batch means over the first n_batches * batch_size sweeps.
    Eigen::VectorXd bm(n_batches);
    for (Eigen::Index b = 0; b < n_batches; ++b)
      bm(b) = col.segment(b * batch_size, batch_size).mean();
    const double bmean = bm.mean();
    const double bvar = (bm.array() - bmean).square().sum() / static_cast<double>(n_batches - 1);
    cs.ts_se = std::sqrt(bvar / static_cast<double>(n_batches));
    std::vector<double> vals(col.data(), col.data() + s);
    cs.q025 = quantile(vals, 0.025);
    cs.q25 = quantile(vals, 0.25);
    cs.q50 = quantile(vals, 0.50);
    cs.q75 = quantile(vals, 0.75);
    cs.q975 = quantile(vals, 0.975);
    out.push_back(cs);
  }
  return out;
}

}  // namespace locscale
