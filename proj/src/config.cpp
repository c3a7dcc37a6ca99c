#include "dcbats/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "dcbats/io.hpp"
#include "json.hpp"

namespace dcbats {

namespace {

using Json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path.empty() ? what : path + ": " + what);
}

// Object view that remembers which keys were read so leftovers can be rejected.
class Object {
 public:
  Object(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json& at(const std::string& key) {
    if (!j_.contains(key)) fail(path(key), "required key missing");
    used_.insert(key);
    return j_.at(key);
  }

  const Json* find(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    return convert<T>(at(key), path(key));
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    const Json* v = find(key);
    return v ? convert<T>(*v, path(key)) : fallback;
  }

  template <class T>
  std::optional<T> optional(const std::string& key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    return convert<T>(*v, path(key));
  }

  void finish() const {
    std::vector<std::string> unknown;
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) unknown.push_back(key);
    }
    if (unknown.empty()) return;
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "'" : ", '") + k + "'";
    fail(path_, "unknown key" + std::string(unknown.size() > 1 ? "s " : " ") + list);
  }

  const Json& raw() const { return j_; }

  template <class T>
  static T convert(const Json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(where, "expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(where, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) fail(where, "expected a number");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) fail(where, "expected a non-negative integer");
      return v.get<std::uint64_t>();
    } else {
      static_assert(std::is_same_v<T, Index>);
      if (!v.is_number_integer()) fail(where, "expected an integer");
      return v.get<Index>();
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

VectorXd to_vector(const Json& v, const std::string& where) {
  if (v.is_number()) return VectorXd::Constant(1, v.get<double>());
  if (!v.is_array()) fail(where, "expected a number or an array of numbers");
  VectorXd out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(where + "[" + std::to_string(i) + "]", "expected a number");
    out[static_cast<Index>(i)] = v[i].get<double>();
  }
  return out;
}

MatrixXd to_matrix(const Json& v, const std::string& where) {
  if (!v.is_array() || v.empty() || !v[0].is_array()) fail(where, "expected an array of rows");
  const auto cols = static_cast<Index>(v[0].size());
  MatrixXd out(static_cast<Index>(v.size()), cols);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const VectorXd row = to_vector(v[i], where + "[" + std::to_string(i) + "]");
    if (row.size() != cols) fail(where, "rows differ in length");
    out.row(static_cast<Index>(i)) = row.transpose();
  }
  return out;
}

std::vector<std::string> to_strings(const Json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) fail(where, "expected an array of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

Index positive_index(Object& o, const std::string& key, Index fallback, Index min = 0) {
  const Index v = o.get_or<Index>(key, fallback);
  if (v < min) fail(o.path(key), "must be at least " + std::to_string(min));
  return v;
}

models::LinearGaussianHmm parse_hmm(Object& o) {
  if (const Json* preset = o.find("preset")) {
    const std::string name = Object::convert<std::string>(*preset, o.path("preset"));
    if (name != "experiment") fail(o.path("preset"), "unknown preset '" + name + "' (expected experiment)");
    for (const char* k : {"z_dim", "x_dim", "emission", "mu0", "sigma0", "c_z", "c_x"}) {
      if (o.has(k)) fail(o.path(k), "cannot be combined with a preset");
    }
    return models::LinearGaussianHmm::experiment();
  }
  const Index z = positive_index(o, "z_dim", 1, 1);
  const Index x = positive_index(o, "x_dim", 1, 1);
  auto m = models::LinearGaussianHmm::standard(z, x);
  auto shaped = [&](const char* key, Index rows, Index cols, MatrixXd& target) {
    if (const Json* v = o.find(key)) {
      const MatrixXd mat = to_matrix(*v, o.path(key));
      if (mat.rows() != rows || mat.cols() != cols) {
        fail(o.path(key), "expected " + std::to_string(rows) + "x" + std::to_string(cols));
      }
      target = mat;
    }
  };
  auto vec = [&](const char* key, Index n, VectorXd& target) {
    if (const Json* v = o.find(key)) {
      const VectorXd got = to_vector(*v, o.path(key));
      if (got.size() != n) fail(o.path(key), "expected " + std::to_string(n) + " entries");
      target = got;
    }
  };
  shaped("emission", x, z, m.emission);
  shaped("sigma0", z, z, m.sigma0);
  vec("mu0", z, m.mu0);
  vec("c_z", z, m.c_z);
  vec("c_x", x, m.c_x);
  return m;
}

Model parse_model(Object o) {
  const std::string type = o.get<std::string>("type");
  ModelVariant variant;
  if (type == "ar-error-regression") {
    variant = models::ArErrorRegression{positive_index(o, "p_cov", 0)};
  } else if (type == "garch-x") {
    variant = models::GarchX{positive_index(o, "d_cov", 0), positive_index(o, "q", 1, 1),
                             positive_index(o, "p", 1, 1)};
  } else if (type == "linear-gaussian-hmm") {
    variant = parse_hmm(o);
  } else if (type == "binary-ar") {
    variant = models::BinaryAr{positive_index(o, "p_lag", 1), positive_index(o, "q_cov", 0)};
  } else if (type == "ccc-bivariate-garch") {
    variant = models::CccBivariateGarch{};
  } else {
    fail(o.path("type"), "unknown model '" + type +
                             "' (expected ar-error-regression, garch-x, linear-gaussian-hmm, binary-ar or "
                             "ccc-bivariate-garch)");
  }
  std::map<std::string, VectorXd> fixed;
  if (const Json* f = o.find("fixed")) {
    Object fo(*f, o.path("fixed"));
    for (const auto& [name, value] : f->items()) fixed[name] = to_vector(fo.at(name), fo.path(name));
  }
  o.finish();
  return Model(std::move(variant), std::move(fixed));
}

// Block-keyed values over the free space, e.g. {"beta": [..], "sigma2": 1}.
VectorXd parse_block_values(const Json& v, const ParameterSpace& space, const std::string& where) {
  Object o(v, where);
  VectorXd out(space.dim());
  for (const auto& b : space.blocks()) {
    const VectorXd values = to_vector(o.at(b.name), o.path(b.name));
    if (values.size() != b.dim) {
      fail(o.path(b.name), "expected " + std::to_string(b.dim) + " values, got " + std::to_string(values.size()));
    }
    out.segment(space.offset(b.name), b.dim) = values;
  }
  o.finish();
  return out;
}

PriorFamily parse_family(Object o) {
  const std::string family = o.get<std::string>("family");
  PriorFamily out;
  if (family == "normal") {
    out = prior::Normal{o.get<double>("mu"), o.get<double>("sigma2")};
  } else if (family == "half-normal") {
    out = prior::HalfNormal{o.get<double>("sigma2")};
  } else if (family == "inverse-gamma") {
    out = prior::InverseGamma{o.get<double>("shape"), o.get<double>("scale")};
  } else if (family == "gamma") {
    out = prior::Gamma{o.get<double>("shape"), o.get<double>("rate")};
  } else if (family == "log-normal") {
    out = prior::LogNormal{o.get<double>("mu"), o.get<double>("sigma2")};
  } else if (family == "uniform") {
    out = prior::Uniform{o.get<double>("lo"), o.get<double>("hi")};
  } else {
    fail(o.path("family"), "unknown prior family '" + family +
                               "' (expected normal, half-normal, inverse-gamma, gamma, log-normal or uniform)");
  }
  o.finish();
  return out;
}

PriorSpec parse_prior(const Json& v, const Model& model) {
  Object o(v, "prior");
  std::map<std::string, PriorFamily> families;
  for (const auto& b : model.space().blocks()) families.emplace(b.name, parse_family(Object(o.at(b.name), o.path(b.name))));
  o.finish();
  return PriorSpec(model.space(), families);
}

SamplerConfig parse_sampler(Object o, ExperimentSpec& spec) {
  SamplerConfig cfg;
  cfg.n_iterations = o.get_or<Index>("iterations", cfg.n_iterations);
  cfg.burn_in = o.optional<Index>("burn_in");
  cfg.initial_step_scale = o.get_or<double>("initial_step_scale", cfg.initial_step_scale);
  cfg.adapt_start = o.optional<Index>("adapt_start");
  cfg.adapt_regularizer = o.get_or<double>("adapt_regularizer", cfg.adapt_regularizer);
  cfg.adapt = o.get_or<bool>("adapt", cfg.adapt);
  cfg.thin = o.get_or<Index>("thin", cfg.thin);
  if (const Json* init = o.find("init")) {
    if (init->is_string()) {
      const std::string s = init->get<std::string>();
      if (s == "prior-mean") {
        spec.init = InitStrategy::PriorMean;
      } else if (s == "truth") {
        spec.init = InitStrategy::Truth;
      } else {
        fail(o.path("init"), "expected \"prior-mean\", \"truth\" or block values");
      }
    } else {
      spec.init = InitStrategy::Explicit;
      spec.init_value = parse_block_values(*init, spec.model.space(), o.path("init"));
    }
  }
  o.finish();
  return cfg;
}

TimeSeries parse_data(Object o, const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  CsvSchema schema;
  const std::filesystem::path path = resolve(o.get<std::string>("path"));
  schema.obs_columns = to_strings(o.at("obs_columns"), o.path("obs_columns"));
  if (const Json* c = o.find("covariate_columns")) schema.covariate_columns = to_strings(*c, o.path("covariate_columns"));
  schema.log_transform = o.get_or<bool>("log_transform", false);
  std::filesystem::path cov_path;
  if (const auto p = o.optional<std::string>("covariate_path")) cov_path = resolve(*p);
  o.finish();
  return ingest_csv(path, schema, cov_path);
}

RunConfig parse_document(const Json& doc, const std::filesystem::path& base_dir) {
  Object root(doc, "");
  const std::string name = root.get<std::string>("name");
  Model model = parse_model(Object(root.at("model"), "model"));
  PriorSpec prior = parse_prior(root.at("prior"), model);
  RunConfig cfg{ExperimentSpec(name, std::move(model), std::move(prior)), {}, std::nullopt};
  ExperimentSpec& spec = cfg.spec;

  if (const Json* data = root.find("data")) spec.data = parse_data(Object(*data, "data"), base_dir);

  const Json* truth = root.find("truth");
  if (truth && truth->is_string()) {
    if (truth->get<std::string>() != "default") fail("truth", "expected \"default\" or block values");
    spec.true_theta = default_true_parameters(spec.model);
  } else if (truth) {
    spec.true_theta = parse_block_values(*truth, spec.model.space(), "truth");
  } else if (spec.data) {
    spec.true_theta = VectorXd::Constant(spec.model.space().dim(), std::numeric_limits<double>::quiet_NaN());
  } else {
    spec.true_theta = default_true_parameters(spec.model);
  }

  if (spec.data) {
    spec.T = root.get_or<Index>("T", spec.data->length());
  } else {
    spec.T = root.get<Index>("T");
  }
  const Json& ks = root.at("K");
  if (!ks.is_array() || ks.empty()) fail("K", "expected a non-empty array of integers");
  for (const auto& k : ks) {
    if (!k.is_number_integer() || k.get<Index>() < 1) fail("K", "entries must be positive integers");
    spec.K_list.push_back(k.get<Index>());
  }
  spec.n_replicates = root.get_or<Index>("replicates", 1);
  spec.level = root.get_or<double>("level", 0.95);
  spec.seed = root.get_or<std::uint64_t>("seed", 0);
  spec.covariates = parse_covariate_generator(root.get_or<std::string>("covariates", "none"));
  if (const Json* s = root.find("sampler")) {
    spec.sampler = parse_sampler(Object(*s, "sampler"), spec);
  }
  if (const Json* out = root.find("output")) {
    Object o(*out, "output");
    cfg.output.dir = o.optional<std::string>("dir");
    cfg.output.draws = o.get_or<bool>("draws", true);
    cfg.output.barycenters = o.get_or<bool>("barycenters", true);
    o.finish();
  }
  if (const auto threads = root.optional<Index>("threads")) {
    if (*threads < 0) fail("threads", "must be non-negative");
    cfg.threads = static_cast<unsigned>(*threads);
  }
  root.finish();
  spec.validate();
  return cfg;
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  try {
    return parse_document(doc, base_dir);
  } catch (const ConfigError&) {
    throw;
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

}  // namespace dcbats
