#pragma once

// Classification catalog. Potential templates use the parameters nu, alpha,
// beta (exact rationals), gh = (4 - gamma)/gamma, and the function
// placeholders W (of t) and U (of x) for the generic rows. Operators use the
// "D:<xi>+G:<chi>+M:<lambda>" syntax. Regimes: any, ne4 (gamma != 4), eq4.

namespace nlsgc::data {

inline constexpr const char* kCatalogJson = R"JSON({
  "version": 1,
  "grid": {
    "gamma": ["1", "2", "3", "4", "6", "-2"],
    "nu": ["0", "1", "2", "gh/4"],
    "alpha_beta": [["1", "0"], ["0", "1"], ["1", "1"]],
    "W": [
      {"value": "t^2", "regime": "any"},
      {"value": "exp(t)", "regime": "any"},
      {"value": "1/(t^2+2)", "regime": "ne4"}
    ],
    "U": [
      {"value": "x^4", "regime": "any"},
      {"value": "exp(x)", "regime": "any"}
    ],
    "Vtx": [
      {"value": "t*x^3", "regime": "any"}
    ]
  },
  "cases": [
    {"id": "1.0", "table": 1, "regime": "any", "template": "Vtx", "params": ["Vtx"],
     "basis": ["M:1"]},
    {"id": "1.1", "table": 1, "regime": "any", "template": "i*W", "params": ["W"],
     "basis": ["M:1", "G:1", "G:t"]},
    {"id": "1.2", "table": 1, "regime": "any", "template": "i/2*(gh*t+nu)/(t^2+1)", "params": ["nu"],
     "constraints": [{"op": "ge", "lhs": "nu", "rhs": "0"}, {"op": "nonzero_pair", "lhs": "gh", "rhs": "nu"}],
     "basis": ["M:1", "G:1", "G:t", "D:t^2+1"]},
    {"id": "1.3", "table": 1, "regime": "any", "template": "i*nu/t", "params": ["nu"],
     "constraints": [{"op": "ne", "lhs": "nu", "rhs": "0"}, {"op": "ne", "lhs": "nu", "rhs": "gh/2"},
                     {"op": "ge", "lhs": "nu", "rhs": "gh/4"}],
     "basis": ["M:1", "G:1", "G:t", "D:t"]},
    {"id": "1.4", "table": 1, "regime": "any", "template": "i",
     "basis": ["M:1", "G:1", "G:t", "D:1"]},
    {"id": "1.5a", "table": 1, "regime": "ne4", "template": "0",
     "basis": ["M:1", "G:1", "G:t", "D:1", "D:t"]},
    {"id": "1.5b", "table": 1, "regime": "eq4", "template": "0",
     "basis": ["M:1", "G:1", "G:t", "D:1", "D:t", "D:t^2"]},
    {"id": "1.6", "table": 1, "regime": "any", "template": "U", "params": ["U"],
     "basis": ["M:1", "D:1"]},
    {"id": "1.7a", "table": 1, "regime": "ne4", "template": "(alpha+i*beta)*x^(-2)", "params": ["alpha", "beta"],
     "constraints": [{"op": "ge", "lhs": "beta", "rhs": "0"}, {"op": "nonzero_pair", "lhs": "alpha", "rhs": "beta"}],
     "basis": ["M:1", "D:1", "D:t"]},
    {"id": "1.7b", "table": 1, "regime": "eq4", "template": "(alpha+i*beta)*x^(-2)", "params": ["alpha", "beta"],
     "constraints": [{"op": "ge", "lhs": "beta", "rhs": "0"}, {"op": "nonzero_pair", "lhs": "alpha", "rhs": "beta"}],
     "basis": ["M:1", "D:1", "D:t", "D:t^2"]},

    {"id": "2.0", "table": 2, "regime": "ne4", "template": "U", "params": ["U"], "n1": "1.6",
     "basis": ["M:1", "D:1"],
     "canon": {"map": {}, "target_params": {"U": "U"}}},
    {"id": "2.1", "table": 2, "regime": "ne4", "template": "(alpha+i*beta)*x^(-2)", "params": ["alpha", "beta"], "n1": "1.7",
     "constraints": [{"op": "ge", "lhs": "beta", "rhs": "0"}, {"op": "nonzero_pair", "lhs": "alpha", "rhs": "beta"}],
     "basis": ["M:1", "D:1", "D:t"],
     "canon": {"map": {}, "target_params": {"alpha": "alpha", "beta": "beta"}}},
    {"id": "2.2", "table": 2, "regime": "ne4", "template": "x^2+i*gh+(alpha+i*beta)*x^(-2)", "params": ["alpha", "beta"], "n1": "1.7",
     "constraints": [{"op": "nonzero_pair", "lhs": "alpha", "rhs": "beta"}],
     "basis": ["M:1", "D:1", "D:exp(4*t)"],
     "canon": {"map": {"T": "-exp(-4*t)"}, "target_params": {"alpha": "alpha", "beta": "beta"}}},
    {"id": "2.3", "table": 2, "regime": "ne4", "template": "i", "n1": "1.4",
     "basis": ["M:1", "D:1", "G:1", "G:t"],
     "canon": {"map": {}}},
    {"id": "2.4", "table": 2, "regime": "ne4", "template": "x+i*nu", "params": ["nu"], "n1": "1.4",
     "constraints": [{"op": "gt", "lhs": "nu", "rhs": "0"}],
     "basis": ["M:1", "D:1", "G:1+M:t", "G:2*t+M:t^2"],
     "canon": {"map": {"T": "nu*t", "X": "-sqrt(nu)*t^2", "Psi": "t^3/3"}}},
    {"id": "2.5", "table": 2, "regime": "ne4", "template": "-x^2+i*nu", "params": ["nu"], "n1": "1.2",
     "constraints": [{"op": "ge", "lhs": "nu", "rhs": "0"}],
     "basis": ["M:1", "D:1", "G:sin(2*t)", "G:cos(2*t)"],
     "canon": {"map": {"T": "tan(2*t)"}, "target_params": {"nu": "nu"}}},
    {"id": "2.6", "table": 2, "regime": "ne4", "template": "x^2+i*nu", "params": ["nu"], "n1": "1.3",
     "constraints": [{"op": "ne", "lhs": "nu", "rhs": "gh"}, {"op": "ne", "lhs": "nu", "rhs": "-gh"},
                     {"op": "ge", "lhs": "nu", "rhs": "0"}],
     "basis": ["M:1", "D:1", "G:exp(2*t)", "G:exp(-2*t)"],
     "canon": {"map": {"T": "-exp(-4*t)"}, "target_params": {"nu": "(gh-nu)/4"}}},
    {"id": "2.7", "table": 2, "regime": "ne4", "template": "0", "n1": "1.5",
     "basis": ["M:1", "D:1", "G:1", "G:t", "D:t"],
     "canon": {"map": {}}},
    {"id": "2.8", "table": 2, "regime": "ne4", "template": "x", "n1": "1.5",
     "basis": ["M:1", "D:1", "G:1+M:t", "G:2*t+M:t^2", "D:2*t+G:3*t^2+M:t^3"],
     "canon": {"map": {"T": "t", "X": "-t^2", "Psi": "t^3/3"}}},
    {"id": "2.9", "table": 2, "regime": "ne4", "template": "x^2+i*gh", "n1": "1.5",
     "basis": ["M:1", "D:1", "G:exp(2*t)", "G:exp(-2*t)", "D:exp(4*t)"],
     "canon": {"map": {"T": "-exp(-4*t)"}}},

    {"id": "3.0", "table": 3, "regime": "eq4", "template": "U", "params": ["U"], "n1": "1.6",
     "basis": ["M:1", "D:1"],
     "canon": {"map": {}, "target_params": {"U": "U"}}},
    {"id": "3.1", "table": 3, "regime": "eq4", "template": "(alpha+i*beta)*x^(-2)", "params": ["alpha", "beta"], "n1": "1.7",
     "constraints": [{"op": "ge", "lhs": "beta", "rhs": "0"}, {"op": "nonzero_pair", "lhs": "alpha", "rhs": "beta"}],
     "basis": ["M:1", "D:1", "D:t", "D:t^2"],
     "canon": {"map": {}, "target_params": {"alpha": "alpha", "beta": "beta"}}},
    {"id": "3.2", "table": 3, "regime": "eq4", "template": "x^2+(alpha+i*beta)*x^(-2)", "params": ["alpha", "beta"], "n1": "1.7",
     "constraints": [{"op": "ge", "lhs": "beta", "rhs": "0"}, {"op": "nonzero_pair", "lhs": "alpha", "rhs": "beta"}],
     "basis": ["M:1", "D:1", "D:exp(4*t)", "D:exp(-4*t)"],
     "canon": {"map": {"T": "-exp(-4*t)"}, "target_params": {"alpha": "alpha", "beta": "beta"}}},
    {"id": "3.3", "table": 3, "regime": "eq4", "template": "-x^2+(alpha+i*beta)*x^(-2)", "params": ["alpha", "beta"], "n1": "1.7",
     "constraints": [{"op": "ge", "lhs": "beta", "rhs": "0"}, {"op": "nonzero_pair", "lhs": "alpha", "rhs": "beta"}],
     "basis": ["M:1", "D:1", "D:cos(4*t)", "D:sin(4*t)"],
     "canon": {"map": {"T": "tan(2*t)"}, "target_params": {"alpha": "alpha", "beta": "beta"}}},
    {"id": "3.4", "table": 3, "regime": "eq4", "template": "i", "n1": "1.4",
     "basis": ["M:1", "D:1", "G:1", "G:t"],
     "canon": {"map": {}}},
    {"id": "3.5", "table": 3, "regime": "eq4", "template": "x+i*nu", "params": ["nu"], "n1": "1.4",
     "constraints": [{"op": "gt", "lhs": "nu", "rhs": "0"}],
     "basis": ["M:1", "D:1", "G:1+M:t", "G:2*t+M:t^2"],
     "canon": {"map": {"T": "nu*t", "X": "-sqrt(nu)*t^2", "Psi": "t^3/3"}}},
    {"id": "3.6", "table": 3, "regime": "eq4", "template": "-x^2+i*nu", "params": ["nu"], "n1": "1.2",
     "constraints": [{"op": "gt", "lhs": "nu", "rhs": "0"}],
     "basis": ["M:1", "D:1", "G:sin(2*t)", "G:cos(2*t)"],
     "canon": {"map": {"T": "tan(2*t)"}, "target_params": {"nu": "nu"}}},
    {"id": "3.7", "table": 3, "regime": "eq4", "template": "x^2+i*nu", "params": ["nu"], "n1": "1.3",
     "constraints": [{"op": "gt", "lhs": "nu", "rhs": "0"}],
     "basis": ["M:1", "D:1", "G:exp(2*t)", "G:exp(-2*t)"],
     "canon": {"map": {"T": "-exp(-4*t)"}, "target_params": {"nu": "(gh-nu)/4"}}},
    {"id": "3.8", "table": 3, "regime": "eq4", "template": "0", "n1": "1.5",
     "basis": ["M:1", "D:1", "G:1", "G:t", "D:t", "D:t^2"],
     "canon": {"map": {}}},
    {"id": "3.9", "table": 3, "regime": "eq4", "template": "x", "n1": "1.5",
     "basis": ["M:1", "D:1", "G:1+M:t", "G:2*t+M:t^2", "D:2*t+G:3*t^2+M:t^3", "D:4*t^2+G:4*t^3+M:t^4"],
     "canon": {"map": {"T": "t", "X": "-t^2", "Psi": "t^3/3"}}},
    {"id": "3.10", "table": 3, "regime": "eq4", "template": "x^2", "n1": "1.5",
     "basis": ["M:1", "D:1", "G:exp(2*t)", "G:exp(-2*t)", "D:exp(4*t)", "D:exp(-4*t)"],
     "canon": {"map": {"T": "-exp(-4*t)"}}},
    {"id": "3.11", "table": 3, "regime": "eq4", "template": "-x^2", "n1": "1.5",
     "basis": ["M:1", "D:1", "G:cos(2*t)", "G:sin(2*t)", "D:cos(4*t)", "D:sin(4*t)"],
     "canon": {"map": {"T": "tan(2*t)"}}}
  ]
})JSON";

}  // namespace nlsgc::data
