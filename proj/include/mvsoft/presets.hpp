#ifndef MVSOFT_PRESETS_HPP_
#define MVSOFT_PRESETS_HPP_

#include <string>
#include <vector>

#include "mvsoft/loss.hpp"

namespace mvsoft {

struct MethodPreset {
  std::string name;
  LossConfig loss;
};

// The full comparison roster with each method's reference hyper-parameters:
// s=32 everywhere; A-Softmax m1=3, AM-Softmax m2=0.35, Arc-Softmax m3=0.5;
// focal gamma=2, hard mining keeps 90%; per-method t for the MV variants.
const std::vector<MethodPreset>& default_method_grid();

// nullptr when the name is unknown.
const MethodPreset* find_method(const std::string& name);

std::vector<std::string> method_names();

}  // namespace mvsoft

#endif  // MVSOFT_PRESETS_HPP_
