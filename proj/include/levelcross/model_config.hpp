#pragma once

#include <string_view>

#include "json.hpp"
#include "levelcross/spectrum.hpp"

namespace levelcross {

// {"model": "independent"}
// {"model": "geometric", "rho": r}
// {"model": "raised_cosine"[, "rho": r]}      Gamma(1) = r, default 1/2
// {"model": "constant", "rho": r}
// {"model": "custom_fourier", "gamma": [1, g1, g2, ...]}
CovarianceModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const CovarianceModel& m);

// Command-line shorthand: "independent", "geometric:0.5", "raised_cosine",
// "raised_cosine:0.3", "constant:0.5", "custom_fourier:1,0.5,0.1".
CovarianceModel parse_model(std::string_view spec);

}  // namespace levelcross
