#include "locscale/summarize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace locscale {

namespace {

std::vector<std::uint8_t> to_bits(const Eigen::MatrixXd& m, Eigen::Index row) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    bits[static_cast<std::size_t>(j)] = m(row, j) != 0.0 ? 1 : 0;
  return bits;
}

}  // namespace

InclusionProbs marginal_inclusion(const std::string& store_dir) {
  InclusionProbs out;
  const SampleMatrix gamma = read_parameter(store_dir, "gamma");
  const SampleMatrix delta = read_parameter(store_dir, "delta");
  out.mean_labels = gamma.labels;
  out.var_labels = delta.labels;
  for (Eigen::Index j = 0; j < gamma.values.cols(); ++j)
    out.mean_probs.push_back(gamma.values.rows() > 0 ? gamma.values.col(j).mean() : 0.0);
  for (Eigen::Index j = 0; j < delta.values.cols(); ++j)
    out.var_probs.push_back(delta.values.rows() > 0 ? delta.values.col(j).mean() : 0.0);
  return out;
}

ModelTable top_models(const std::string& store_dir, int n_models) {
  if (n_models < 1) throw std::runtime_error("n_models must be at least 1");
  const SampleMatrix gamma = read_parameter(store_dir, "gamma");
  const SampleMatrix delta = read_parameter(store_dir, "delta");
  ModelTable table;
  table.mean_labels = gamma.labels;
  table.var_labels = delta.labels;
  table.retained = gamma.values.rows();

  struct Entry {
    long freq = 0;
    long first_visit = 0;
    std::vector<std::uint8_t> mean_pattern, var_pattern;
  };
  std::map<std::string, Entry> counts;
  for (Eigen::Index s = 0; s < gamma.values.rows(); ++s) {
    auto mb = to_bits(gamma.values, s);
    auto vb = to_bits(delta.values, s);
    std::string key(mb.begin(), mb.end());
    key.push_back(2);
    key.insert(key.end(), vb.begin(), vb.end());
    auto& e = counts[key];
    if (e.freq == 0) {
      e.first_visit = s;
      e.mean_pattern = std::move(mb);
      e.var_pattern = std::move(vb);
    }
    ++e.freq;
  }
  table.visited = static_cast<long>(counts.size());

  std::vector<const Entry*> entries;
  entries.reserve(counts.size());
  for (const auto& [key, e] : counts) entries.push_back(&e);
  std::sort(entries.begin(), entries.end(), [](const Entry* a, const Entry* b) {
    if (a->freq != b->freq) return a->freq > b->freq;
    return a->first_visit < b->first_visit;
  });

  double cumulative = 0.0;
  const auto limit = std::min<std::size_t>(static_cast<std::size_t>(n_models), entries.size());
  for (std::size_t i = 0; i < limit; ++i) {
    ModelRow row;
    row.mean_pattern = entries[i]->mean_pattern;
    row.var_pattern = entries[i]->var_pattern;
    row.freq = entries[i]->freq;
    row.prob = 100.0 * static_cast<double>(row.freq) / static_cast<double>(table.retained);
    cumulative += row.prob;
    row.cumulative = cumulative;
    table.rows.push_back(std::move(row));
  }
  return table;
}

Deviances deviances(const std::string& store_dir, const DesignMatrices& design) {
  const SampleMatrix beta = read_parameter(store_dir, "beta");
  const SampleMatrix alpha = read_parameter(store_dir, "alpha");
  const SampleMatrix sigma2 = read_parameter(store_dir, "sigma2");
  const Eigen::Index s_count = beta.values.rows();
  const int n = design.n;

  Deviances dev;
  const double ybar = design.y.mean();
  const double mle_var = (design.y.array() - ybar).square().sum() / n;
  dev.null_deviance = n * (std::log(2.0 * std::numbers::pi) + std::log(mle_var) + 1.0);

  double total = 0.0;
  for (Eigen::Index s = 0; s < s_count; ++s) {
    const Eigen::VectorXd mu = design.Xstar * beta.values.row(s).transpose();
    Eigen::VectorXd log_var = Eigen::VectorXd::Constant(n, std::log(sigma2.values(s, 0)));
    if (design.p2 > 0) log_var += design.Z * alpha.values.row(s).transpose();
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = design.y(i) - mu(i);
      ll += -0.5 * (std::log(2.0 * std::numbers::pi) + log_var(i) +
                    r * r / std::exp(log_var(i)));
    }
    total += -2.0 * ll;
  }
  dev.mean_posterior = total / static_cast<double>(s_count);
  return dev;
}

namespace {

// R-style wrapped named-vector block: alternating label and value rows.
std::string named_vector_block(const std::vector<std::string>& labels,
                               const std::vector<double>& values, int per_row = 8) {
  std::ostringstream os;
  char buf[32];
  for (std::size_t at = 0; at < labels.size(); at += static_cast<std::size_t>(per_row)) {
    const auto end = std::min(labels.size(), at + static_cast<std::size_t>(per_row));
    std::vector<std::size_t> width(end - at);
    for (std::size_t i = at; i < end; ++i) {
      std::snprintf(buf, sizeof buf, "%.4f", values[i]);
      width[i - at] = std::max(labels[i].size(), std::strlen(buf));
    }
    for (std::size_t i = at; i < end; ++i)
      os << std::string(width[i - at] + 2 - labels[i].size(), ' ') << labels[i];
    os << "\n";
    for (std::size_t i = at; i < end; ++i) {
      std::snprintf(buf, sizeof buf, "%.4f", values[i]);
      os << std::string(width[i - at] + 2 - std::strlen(buf), ' ') << buf;
    }
    os << "\n";
  }
  return os.str();
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '.');
  return out;
}

}  // namespace

std::string print_report(const std::string& store_dir) {
  const RunManifest manifest = read_manifest(store_dir);
  const InclusionProbs inc = marginal_inclusion(store_dir);
  std::ostringstream os;
  os << manifest.retained << " posterior samples\n\n";
  os << "Mean model - marginal inclusion probabilities\n";
  if (inc.mean_labels.empty())
    os << "  (intercept only)\n";
  else
    os << named_vector_block(inc.mean_labels, inc.mean_probs);
  os << "\nVariance model - marginal inclusion probabilities\n";
  if (inc.var_labels.empty())
    os << "  (intercept only)\n";
  else
    os << named_vector_block(inc.var_labels, inc.var_probs);
  return os.str();
}

std::string summary_report(const std::string& store_dir, const DesignMatrices& design,
                           int n_models) {
  const RunManifest manifest = read_manifest(store_dir);
  const ModelTable table = top_models(store_dir, n_models);
  const Deviances dev = deviances(store_dir, design);
  std::ostringstream os;
  os << "Specified model for the mean and variance:\n" << manifest.formula << "\n\n";
  os << "Specified priors:\n";
  for (const auto& key : {"c.beta", "c.alpha", "pi.mu", "pi.sigma", "sigma"}) {
    const auto it = manifest.priors.find(key);
    if (it != manifest.priors.end()) os << "  " << key << " = " << it->second << "\n";
  }
  os << "\nTotal posterior samples: " << manifest.retained << " ; burn-in: " << manifest.burn
     << " ; thinning: " << manifest.thin << "\n\n";
  os << "Files stored in " << manifest.store_dir << "\n\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", dev.null_deviance);
  os << "Null deviance:           " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.3f", dev.mean_posterior);
  os << "Mean posterior deviance: " << buf << "\n\n";

  os << "Joint mean/variance model posterior probabilities:\n";
  std::vector<std::string> headers;
  for (const auto& l : table.mean_labels) headers.push_back("mean." + sanitize(l));
  for (const auto& l : table.var_labels) headers.push_back("var." + sanitize(l));
  headers.push_back("freq");
  headers.push_back("prob");
  headers.push_back("cumulative");

  std::vector<std::vector<std::string>> cells;
  for (const auto& row : table.rows) {
    std::vector<std::string> r;
    for (const auto b : row.mean_pattern) r.push_back(b ? "1" : "0");
    for (const auto b : row.var_pattern) r.push_back(b ? "1" : "0");
    r.push_back(std::to_string(row.freq));
    std::snprintf(buf, sizeof buf, "%.2f", row.prob);
    r.push_back(buf);
    std::snprintf(buf, sizeof buf, "%.2f", row.cumulative);
    r.push_back(buf);
    cells.push_back(std::move(r));
  }
  std::vector<std::size_t> width(headers.size());
  for (std::size_t j = 0; j < headers.size(); ++j) {
    width[j] = headers[j].size();
    for (const auto& r : cells) width[j] = std::max(width[j], r[j].size());
  }
  const std::size_t row_label_width = std::to_string(cells.size()).size();
  os << std::string(row_label_width, ' ');
  for (std::size_t j = 0; j < headers.size(); ++j)
    os << " " << std::string(width[j] - headers[j].size(), ' ') << headers[j];
  os << "\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    os << std::string(row_label_width - idx.size(), ' ') << idx;
    for (std::size_t j = 0; j < headers.size(); ++j)
      os << " " << std::string(width[j] - cells[i][j].size(), ' ') << cells[i][j];
    os << "\n";
  }
  os << "Displaying " << table.rows.size() << " models of the " << table.visited << " visited\n";
  std::snprintf(buf, sizeof buf, "%.2f",
                table.rows.empty() ? 0.0 : table.rows.back().cumulative);
  os << table.rows.size() << " models account for " << buf << "\n";
  return os.str();
}

std::string summary_json(const std::string& store_dir, const DesignMatrices& design,
                         int n_models) {
  const RunManifest manifest = read_manifest(store_dir);
  const InclusionProbs inc = marginal_inclusion(store_dir);
  const ModelTable table = top_models(store_dir, n_models);
  const Deviances dev = deviances(store_dir, design);
  nlohmann::json j;
  j["formula"] = manifest.formula;
  j["retained"] = manifest.retained;
  j["priors"] = manifest.priors;
  j["null_deviance"] = dev.null_deviance;
  j["mean_posterior_deviance"] = dev.mean_posterior;
  j["inclusion"]["mean"] = nlohmann::json::object();
  for (std::size_t i = 0; i < inc.mean_labels.size(); ++i)
    j["inclusion"]["mean"][inc.mean_labels[i]] = inc.mean_probs[i];
  j["inclusion"]["variance"] = nlohmann::json::object();
  for (std::size_t i = 0; i < inc.var_labels.size(); ++i)
    j["inclusion"]["variance"][inc.var_labels[i]] = inc.var_probs[i];
  j["visited_models"] = table.visited;
  j["models"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r;
    r["mean"] = row.mean_pattern;
    r["variance"] = row.var_pattern;
    r["freq"] = row.freq;
    r["prob"] = row.prob;
    r["cumulative"] = row.cumulative;
    j["models"].push_back(r);
  }
  return j.dump(2);
}

std::string parameter_summary_report(const std::string& store_dir, const std::string& name) {
  const SampleMatrix samples = read_parameter(store_dir, name);
  const auto rows = chain_summary(samples);
  std::ostringstream os;
  os << "Posterior summary of '" << name << "' (" << samples.values.rows() << " samples)\n\n";
  std::size_t label_width = 8;
  for (const auto& r : rows) label_width = std::max(label_width, r.label.size());
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %12s %12s %12s %14s\n", static_cast<int>(label_width), "",
                "Mean", "SD", "Naive SE", "Time-series SE");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %12.4e %12.4e %12.4e %14.4e\n",
                  static_cast<int>(label_width), r.label.c_str(), r.mean, r.sd, r.naive_se, r.ts_se);
    os << buf;
  }
  os << "\nQuantiles:\n";
  std::snprintf(buf, sizeof buf, "%-*s %12s %12s %12s %12s %12s\n", static_cast<int>(label_width),
                "", "2.5%", "25%", "50%", "75%", "97.5%");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %12.4g %12.4g %12.4g %12.4g %12.4g\n",
                  static_cast<int>(label_width), r.label.c_str(), r.q025, r.q25, r.q50, r.q75,
                  r.q975);
    os << buf;
  }
  return os.str();
}

}  // namespace locscale
