#include "dpc/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "dpc/errors.hpp"

namespace dpc {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(i) = arr[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows[0].size() : 0;
  Eigen::MatrixXd m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw InputError("ragged matrix in model file");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

std::string family_name(RhoFamily family) {
  return family == RhoFamily::Square ? "square" : "tukey-biweight";
}

RhoFamily family_from_name(const std::string& name) {
  if (name == "square") return RhoFamily::Square;
  if (name == "tukey-biweight" || name == "tukey") return RhoFamily::TukeyBiweight;
  throw InputError("unknown rho family '" + name + "'");
}

std::string init_name(InitStrategy init) {
  switch (init) {
    case InitStrategy::Auto: return "auto";
    case InitStrategy::ClassicalPc: return "classical-pc";
    case InitStrategy::SphericalPc: return "spherical-pc";
    case InitStrategy::UserVector: return "user-vector";
  }
  return "auto";
}

InitStrategy init_from_name(const std::string& name) {
  if (name == "auto") return InitStrategy::Auto;
  if (name == "classical-pc") return InitStrategy::ClassicalPc;
  if (name == "spherical-pc") return InitStrategy::SphericalPc;
  if (name == "user-vector") return InitStrategy::UserVector;
  throw InputError("unknown init strategy '" + name + "'");
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("'" + path.string() + "': " + e.what());
  }
  return j;
}

}  // namespace

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  json j;
  j["format_version"] = model.format_version;
  j["config"] = {{"k", model.config.k},
                 {"p", model.config.p},
                 {"epsilon", model.config.epsilon},
                 {"max_iter", model.config.max_iter},
                 {"init", init_name(model.config.init)},
                 {"seed", model.config.seed}};
  json comps = json::array();
  for (const auto& component : model.components) {
    comps.push_back({{"k", component.k},
                     {"f", vector_to_json(component.f)},
                     {"beta", matrix_to_json(component.beta)},
                     {"alpha", vector_to_json(component.alpha)},
                     {"convergence",
                      {{"iterations", component.convergence.iterations},
                       {"criterion", component.convergence.criterion},
                       {"converged", component.convergence.converged}}}});
  }
  j["components"] = std::move(comps);
  if (model.robust) {
    json scales = json::array();
    for (const auto& s : model.robust->scales) scales.push_back(vector_to_json(s));
    j["robust"] = {{"family", family_name(model.robust->family)},
                   {"c", model.robust->c},
                   {"b", model.robust->b},
                   {"scales", std::move(scales)}};
  }
  j["provenance"] = {{"input_digest", model.provenance.input_digest},
                     {"timestamp", model.provenance.timestamp},
                     {"seed", model.provenance.seed}};

  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

ModelFile load_model(const std::filesystem::path& path) {
  const json j = load_json_file(path);
  ModelFile model;
  try {
    model.format_version = j.at("format_version").get<int>();
    if (model.format_version != 1) {
      throw InputError("unsupported model format version " +
                       std::to_string(model.format_version));
    }
    const json& cfg = j.at("config");
    model.config.k = cfg.at("k").get<int>();
    model.config.p = cfg.at("p").get<int>();
    model.config.epsilon = cfg.at("epsilon").get<double>();
    model.config.max_iter = cfg.at("max_iter").get<int>();
    model.config.init = init_from_name(cfg.at("init").get<std::string>());
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    for (const json& c : j.at("components")) {
      DpcComponent component;
      component.k = c.at("k").get<int>();
      component.f = vector_from_json(c.at("f"));
      component.beta = matrix_from_json(c.at("beta"));
      component.alpha = vector_from_json(c.at("alpha"));
      const json& conv = c.at("convergence");
      component.convergence.iterations = conv.at("iterations").get<int>();
      component.convergence.criterion = conv.at("criterion").get<double>();
      component.convergence.converged = conv.at("converged").get<bool>();
      model.components.push_back(std::move(component));
    }
    if (j.contains("robust")) {
      RobustInfo info;
      const json& r = j.at("robust");
      info.family = family_from_name(r.at("family").get<std::string>());
      info.c = r.at("c").get<double>();
      info.b = r.at("b").get<double>();
      for (const json& s : r.at("scales")) info.scales.push_back(vector_from_json(s));
      model.robust = std::move(info);
    }
    const json& prov = j.at("provenance");
    model.provenance.input_digest = prov.at("input_digest").get<std::string>();
    model.provenance.timestamp = prov.at("timestamp").get<std::string>();
    model.provenance.seed = prov.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw InputError("'" + path.string() + "': malformed model file: " +
                     e.what());
  }
  return model;
}

std::string fnv1a_digest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char chunk[4096];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(chunk[i]);
      hash *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string make_timestamp() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_results_csv(const std::filesystem::path& path,
                       const StudyResults& results) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << "# dpc-results format 1\n";
  out << "method,param,replications,failures,mean_mse,se_mse,mean_srs,se_srs\n";
  char buf[64];
  const auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (const auto& row : results.rows) {
    out << method_name(row.spec.method) << ',' << row.spec.param << ','
        << row.ok << ',' << row.failed << ',' << num(row.mean_mse) << ','
        << num(row.se_mse) << ',';
    out << (row.mean_srs ? num(*row.mean_srs) : "") << ','
        << (row.se_srs ? num(*row.se_srs) : "") << '\n';
  }
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

void write_results_json(const std::filesystem::path& path,
                        const StudyResults& results) {
  json j;
  j["format_version"] = 1;
  j["config"] = {{"T", results.config.T},
                 {"replications", results.config.replications},
                 {"seed", results.config.seed},
                 {"model", results.config.model},
                 {"threads", results.config.threads}};
  json rows = json::array();
  for (const auto& row : results.rows) {
    json r = {{"method", method_name(row.spec.method)},
              {"param", row.spec.param},
              {"ok", row.ok},
              {"failed", row.failed},
              {"mean_mse", row.mean_mse},
              {"se_mse", row.se_mse},
              {"mse", row.mses}};
    if (row.mean_srs) {
      r["mean_srs"] = *row.mean_srs;
      r["se_srs"] = *row.se_srs;
      r["srs"] = row.srss;
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

McConfig read_study_config(const std::filesystem::path& path) {
  const json j = load_json_file(path);
  McConfig config;
  try {
    config.T = j.value("T", 100);
    config.replications = j.value("replications", 50);
    config.seed = j.value("seed", std::uint64_t{1});
    config.model = j.value("model", std::string("s4"));
    config.threads = j.value("threads", 1);
    config.methods.clear();
    for (const json& ms : j.at("methods")) {
      MethodSpec spec;
      spec.method = parse_method(ms.at("method").get<std::string>());
      spec.param = ms.at("param").get<int>();
      config.methods.push_back(spec);
    }
    if (j.contains("mscale")) {
      MScaleSpec ms;
      const json& s = j.at("mscale");
      ms.family = family_from_name(s.value("family", std::string("tukey-biweight")));
      ms.c = s.value("c", 5.13);
      ms.b = s.value("b", 0.1);
      config.mscale = ms;
    }
  } catch (const json::exception& e) {
    throw InputError("'" + path.string() + "': malformed study config: " +
                     e.what());
  }
  config.validate();
  return config;
}

}  // namespace dpc
