#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ldpnb/dimred.hpp"
#include "ldpnb/errors.hpp"
#include "ldpnb/linalg.hpp"
#include "ldpnb/model.hpp"

namespace ldpnb {

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ParseError(std::string(what) + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.at(0).size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (!row.is_array() || row.size() != cols) throw ParseError(std::string(what) + ": ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = row.at(c).get<double>();
  }
  return m;
}

}  // namespace detail

inline nlohmann::json model_to_json(const NaiveBayesModel& model) {
  nlohmann::json j;
  j["type"] = "naive_bayes";
  j["priors"] = model.priors;
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : model.features) {
    nlohmann::json fj;
    if (const auto* d = std::get_if<DiscreteFeatureParams>(&f)) {
      fj["kind"] = "discrete";
      fj["cardinality"] = d->cardinality;
      fj["probs"] = detail::matrix_to_json(d->probs);
      fj["unseen"] = d->unseen;
    } else {
      const auto& g = std::get<GaussianFeatureParams>(f);
      fj["kind"] = "gaussian";
      fj["mu"] = g.mu;
      fj["sigma2"] = g.sigma2;
    }
    features.push_back(std::move(fj));
  }
  j["features"] = std::move(features);
  return j;
}

inline NaiveBayesModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("type").get<std::string>() != "naive_bayes") {
      throw ParseError("model json: type must be 'naive_bayes'");
    }
    NaiveBayesModel model;
    model.priors = j.at("priors").get<std::vector<double>>();
    for (const auto& fj : j.at("features")) {
      const std::string kind = fj.at("kind").get<std::string>();
      if (kind == "discrete") {
        DiscreteFeatureParams d;
        d.cardinality = fj.at("cardinality").get<int>();
        d.probs = detail::matrix_from_json(fj.at("probs"), "probs");
        d.unseen = fj.at("unseen").get<std::vector<double>>();
        model.features.emplace_back(std::move(d));
      } else if (kind == "gaussian") {
        GaussianFeatureParams g;
        g.mu = fj.at("mu").get<std::vector<double>>();
        g.sigma2 = fj.at("sigma2").get<std::vector<double>>();
        model.features.emplace_back(std::move(g));
      } else {
        throw ParseError("model json: unknown feature kind '" + kind + "'");
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model json: ") + e.what());
  }
}

inline nlohmann::json projection_to_json(const ProjectionMatrix& p) {
  nlohmann::json j;
  j["type"] = "projection";
  j["method"] = p.method == DimredMethod::kPca ? "pca" : "dca";
  j["rows"] = detail::matrix_to_json(p.rows);
  j["feature_means"] = p.feature_means;
  j["eigenvalues"] = p.eigenvalues;
  j["out_min"] = p.out_min;
  j["out_max"] = p.out_max;
  return j;
}

inline ProjectionMatrix projection_from_json(const nlohmann::json& j) {
  try {
    if (j.at("type").get<std::string>() != "projection") {
      throw ParseError("projection json: type must be 'projection'");
    }
    ProjectionMatrix p;
    const std::string method = j.at("method").get<std::string>();
    if (method == "pca") {
      p.method = DimredMethod::kPca;
    } else if (method == "dca") {
      p.method = DimredMethod::kDca;
    } else {
      throw ParseError("projection json: unknown method '" + method + "'");
    }
    p.rows = detail::matrix_from_json(j.at("rows"), "rows");
    p.feature_means = j.at("feature_means").get<std::vector<double>>();
    p.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    p.out_min = j.at("out_min").get<std::vector<double>>();
    p.out_max = j.at("out_max").get<std::vector<double>>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("projection json: ") + e.what());
  }
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  try {
    return nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace ldpnb
