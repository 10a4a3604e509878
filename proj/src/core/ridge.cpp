#include "ridge.hpp"

#include <cmath>
#include <limits>

#include "io.hpp"

namespace erp {

namespace {
// Reciprocal condition estimates below this are treated as singular when the
// system is not regularized.
constexpr double kSingularRcond = 1e-13;
}  // namespace

LinearPredictor fit_ridge(const ERDataset& data, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw UsageError("ridge beta must be a finite non-negative number");
    const auto n = static_cast<Eigen::Index>(data.size());
    if (n == 0) throw DataError("cannot fit ridge for '" + data.model_id + "' on an empty dataset");
    if (!data.targets.allFinite()) throw DataError("non-finite target in dataset for '" + data.model_id + "'");
    const Eigen::Index d = data.features.cols();

    Matrix design(n, d + 1);
    design.leftCols(d) = data.features;
    design.col(d).setOnes();

    Matrix gram = Matrix::Zero(d + 1, d + 1);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
    gram = gram.selfadjointView<Eigen::Lower>();
    gram.diagonal().array() += beta;
    const Vector rhs = design.transpose() * data.targets;

    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success || (beta == 0.0 && llt.rcond() < kSingularRcond))
        throw NumericalError("singular normal equations for '" + data.model_id +
                             "' (beta = 0 with collinear or too few prompts); use beta > 0");
    const Vector solution = llt.solve(rhs);
    if (!solution.allFinite()) throw NumericalError("ridge solution for '" + data.model_id + "' is not finite");

    LinearPredictor p;
    p.model_id = data.model_id;
    p.weights = solution.head(d);
    p.bias = solution(d);
    p.beta = beta;
    return p;
}

double predict(const LinearPredictor& p, const Eigen::Ref<const Vector>& embedding) {
    if (embedding.size() != p.weights.size())
        throw DataError("embedding dimension " + std::to_string(embedding.size()) + " does not match predictor '" +
                        p.model_id + "' dimension " + std::to_string(p.weights.size()));
    return p.weights.dot(embedding) + p.bias;
}

double r_squared(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) throw DataError("r_squared: length mismatch");
    if (targets.empty()) throw DataError("r_squared: no samples");
    long double mean = 0.0L;
    for (double t : targets) mean += t;
    mean /= static_cast<long double>(targets.size());
    long double ss_res = 0.0L, ss_tot = 0.0L;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const long double r = static_cast<long double>(targets[i]) - predictions[i];
        const long double t = static_cast<long double>(targets[i]) - mean;
        ss_res += r * r;
        ss_tot += t * t;
    }
    bool constant = true;
    for (double t : targets) constant = constant && t == targets.front();
    if (constant || ss_tot == 0.0L) throw DataError("R^2 undefined: all targets are identical");
    return static_cast<double>(1.0L - ss_res / ss_tot);
}

io::json predictor_to_json(const LinearPredictor& p) {
    io::json doc;
    doc["model_id"] = p.model_id;
    doc["beta"] = p.beta;
    doc["dim"] = p.dim();
    doc["bias"] = p.bias;
    doc["weights"] = std::vector<double>(p.weights.data(), p.weights.data() + p.weights.size());
    return doc;
}

LinearPredictor predictor_from_json(const io::json& doc) {
    try {
        LinearPredictor p;
        p.model_id = doc.at("model_id").get<std::string>();
        p.beta = doc.at("beta").get<double>();
        p.bias = doc.at("bias").get<double>();
        const auto dim = doc.at("dim").get<std::size_t>();
        const auto w = doc.at("weights").get<std::vector<double>>();
        if (w.size() != dim || dim == 0)
            throw DataError("predictor '" + p.model_id + "': weights length does not match dim");
        if (!(p.beta >= 0.0) || !std::isfinite(p.bias))
            throw DataError("predictor '" + p.model_id + "': invalid beta or bias");
        p.weights = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
        if (!p.weights.allFinite()) throw DataError("predictor '" + p.model_id + "': non-finite weight");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed predictor document: ") + e.what());
    }
}

void save_predictor(const std::filesystem::path& path, const LinearPredictor& p, const io::json& manifest) {
    auto doc = predictor_to_json(p);
    if (!manifest.is_null()) doc["manifest"] = manifest;
    io::write_file(path, io::dump_json(doc));
}

LinearPredictor load_predictor(const std::filesystem::path& path) {
    try {
        return predictor_from_json(io::parse_json_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace erp
