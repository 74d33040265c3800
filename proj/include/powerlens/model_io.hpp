#pragma once

#include <iosfwd>
#include <string>

#include "powerlens/model.hpp"

namespace powerlens {

/// Text model file, versioned: first line `powerlens-model v1 <kind>`, then
/// kind-specific sections. Readers reject unknown versions.
void save_model(const PowerModel& model, std::ostream& out);
void save_model_file(const PowerModel& model, const std::string& path);

PowerModel load_model(std::istream& in);
PowerModel load_model_file(const std::string& path);

}  // namespace powerlens
