#include "lta/fremen.hpp"

namespace lta::fremen {

namespace {

Json complex_array(const FremenModel::ComplexVector& v) {
    Json out = Json::array();
    for (Eigen::Index j = 0; j < v.size(); ++j) out.push_back({v[j].real(), v[j].imag()});
    return out;
}

FremenModel::ComplexVector parse_complex_array(const Json& arr, const char* what) {
    if (!arr.is_array()) throw ValidationError(std::string("fremen: '") + what + "' must be an array");
    FremenModel::ComplexVector v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t j = 0; j < arr.size(); ++j) {
        const auto& pair = arr[j];
        if (!pair.is_array() || pair.size() != 2)
            throw ValidationError(std::string("fremen: '") + what + "' entries must be [re, im]");
        v[static_cast<Eigen::Index>(j)] = {pair[0].get<double>(), pair[1].get<double>()};
    }
    return v;
}

}  // namespace

Json to_json(const FremenModel& model) {
    return {{"schema_version", kSchemaVersion},
            {"n", model.count()},
            {"sum_s", model.sum_states()},
            {"periods_s", model.periods()},
            {"order", model.options().order},
            {"epsilon", model.options().epsilon},
            {"state_sums", complex_array(model.state_sums())},
            {"unit_sums", complex_array(model.unit_sums())},
            {"rebuilt", model.rebuilt() && !model.stale()}};
}

FremenModel from_json(const Json& doc) {
    StrictObject o(doc, "fremen model");
    const int version = o.get<int>("schema_version");
    if (version != kSchemaVersion)
        throw ValidationError("fremen model: unsupported schema_version " + std::to_string(version));
    FremenOptions options;
    options.periods_s = o.get<std::vector<double>>("periods_s");
    options.order = o.get<int>("order");
    options.epsilon = o.get<double>("epsilon");
    const auto n = o.get<std::size_t>("n");
    const auto sum_s = o.get<double>("sum_s");
    auto state_sums = parse_complex_array(o.require("state_sums"), "state_sums");
    auto unit_sums = parse_complex_array(o.require("unit_sums"), "unit_sums");
    const bool rebuilt = o.get_or<bool>("rebuilt", false);
    o.finish();

    FremenModel model(std::move(options));
    model.restore(n, sum_s, std::move(state_sums), std::move(unit_sums));
    if (rebuilt && n > 0) model.rebuild();
    return model;
}

}  // namespace lta::fremen
