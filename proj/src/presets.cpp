#include "mvsoft/presets.hpp"

namespace mvsoft {

namespace {

LossConfig base() {
  LossConfig c;
  c.scale_s = 32.0;
  return c;
}

MarginSpec a_margin() { return MarginSpec{3, 0.0, 0.0}; }
MarginSpec am_margin() { return MarginSpec{1, 0.35, 0.0}; }
MarginSpec arc_margin() { return MarginSpec{1, 0.0, 0.5}; }

MiningSpec focal2() { return MiningSpec{MiningKind::focal, 2.0, 1.0}; }
MiningSpec hard90() { return MiningSpec{MiningKind::hard, 0.0, 0.9}; }

std::vector<MethodPreset> build() {
  std::vector<MethodPreset> grid;
  auto add = [&grid](const std::string& name, const LossConfig& cfg) {
    grid.push_back({name, cfg});
  };

  add("Softmax", base());

  LossConfig c = base();
  c.mining = focal2();
  add("F-Softmax", c);

  c = base();
  c.mining = hard90();
  add("HM-Softmax", c);

  c = base();
  c.margin = a_margin();
  add("A-Softmax", c);

  c = base();
  c.margin = am_margin();
  add("AM-Softmax", c);

  c = base();
  c.margin = arc_margin();
  add("Arc-Softmax", c);

  c = base();
  c.margin = arc_margin();
  c.mining = focal2();
  add("F-Arc-Softmax", c);

  c = base();
  c.margin = arc_margin();
  c.mining = hard90();
  add("HM-Arc-Softmax", c);

  c = base();
  c.margin = am_margin();
  c.mining = focal2();
  add("F-AM-Softmax", c);

  c = base();
  c.margin = am_margin();
  c.mining = hard90();
  add("HM-AM-Softmax", c);

  c = base();
  c.margin = arc_margin();
  c.mv_mode = MvMode::fixed;
  c.t = 0.2;
  add("MV-Arc-Softmax-f", c);

  c = base();
  c.margin = arc_margin();
  c.mv_mode = MvMode::adaptive;
  c.t = 0.3;
  add("MV-Arc-Softmax-a", c);

  c = base();
  c.margin = am_margin();
  c.mv_mode = MvMode::fixed;
  c.t = 0.25;
  add("MV-AM-Softmax-f", c);

  c = base();
  c.margin = am_margin();
  c.mv_mode = MvMode::adaptive;
  c.t = 0.2;
  add("MV-AM-Softmax-a", c);

  return grid;
}

}  // namespace

const std::vector<MethodPreset>& default_method_grid() {
  static const std::vector<MethodPreset> grid = build();
  return grid;
}

const MethodPreset* find_method(const std::string& name) {
  for (const MethodPreset& m : default_method_grid()) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

std::vector<std::string> method_names() {
  std::vector<std::string> names;
  for (const MethodPreset& m : default_method_grid()) names.push_back(m.name);
  return names;
}

}  // namespace mvsoft
