#pragma once

#include <string>
#include <string_view>

#include "celldev/genome.hpp"
#include "celldev/gray_image.hpp"
#include "celldev/organism.hpp"

namespace celldev::flags {

enum class TargetKind { two_bands, three_bands, disc, half_discs };

std::string_view to_string(TargetKind kind);
TargetKind parse_target_kind(std::string_view text);

// Parametric benchmark pictures:
//   two_bands   top half 0, bottom half 255
//   three_bands horizontal thirds 0 / 128 / 255, spare rows go to the middle
//   disc        255 disc of radius 0.35*min(w,h) centred on the grid, on 0
//   half_discs  128 half-disc (radius 0.4*w) on the top edge midpoint and
//               255 half-disc on the bottom edge midpoint, on 0
GrayImage make_target(TargetKind kind, int width, int height);

// 1 - mean squared difference of levels normalised to [0,1].
double similarity(const GrayImage& a, const GrayImage& b);

enum class Family { developmental, regression };

struct ModelVariant {
  Family family = Family::developmental;
  int chemicals = 1;
  neuro::Topology topology = neuro::Topology::feedforward;

  // Input and output counts a genome must have (bias excluded).
  neat::IoShape io() const;
  std::string name() const;

  friend bool operator==(const ModelVariant&, const ModelVariant&) = default;
};

// Accepts 1-ffwd, 1-recurr, 2-ffwd, 2-recurr and regression.
ModelVariant parse_variant(std::string_view name);

struct Evaluation {
  double fitness = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Developmental variants grow the organism from the zero state and score
// the converged phenotype; a non-converged organism scores 0. The
// regression variant maps normalised cell coordinates straight to levels.
Evaluation evaluate(const neat::Genome& genome, const ModelVariant& variant,
                    const GrayImage& target, const devo::GrowthConfig& growth);

// Image the regression variant draws for `genome` on a width x height grid.
GrayImage regression_image(const neat::Genome& genome, int width, int height);

}  // namespace celldev::flags
