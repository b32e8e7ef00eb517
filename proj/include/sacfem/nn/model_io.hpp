#pragma once

#include <iosfwd>
#include <string>

#include "sacfem/nn/encdec.hpp"

namespace sacfem::nn {

/// JSON document with dims, normalization and flat row-major tensors keyed by
/// layer/direction/gate, e.g. "encoder.0.fwd.forget.W_d".
std::string model_to_json(const EncDecParams& params);
EncDecParams model_from_json(const std::string& text);

void save_model(const EncDecParams& params, const std::string& path);
EncDecParams load_model(const std::string& path);

}  // namespace sacfem::nn
