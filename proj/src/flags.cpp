#include "celldev/flags.hpp"

#include <array>
#include <stdexcept>

namespace celldev::flags {

std::string_view to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::two_bands: return "2bands";
    case TargetKind::three_bands: return "3bands";
    case TargetKind::disc: return "disc";
    case TargetKind::half_discs: return "halfdiscs";
  }
  return "2bands";
}

TargetKind parse_target_kind(std::string_view text) {
  if (text == "2bands") return TargetKind::two_bands;
  if (text == "3bands") return TargetKind::three_bands;
  if (text == "disc") return TargetKind::disc;
  if (text == "halfdiscs") return TargetKind::half_discs;
  throw std::invalid_argument("unknown target kind: " + std::string(text));
}

GrayImage make_target(TargetKind kind, int width, int height) {
  if (width < 2 || height < 2) throw std::invalid_argument("target needs at least 2x2 pixels");
  GrayImage img(width, height, 0);
  const double cy = (height - 1) / 2.0;
  const double cx = (width - 1) / 2.0;
  auto inside = [](double r, double c, double r0, double c0, double radius) {
    return (r - r0) * (r - r0) + (c - c0) * (c - c0) <= radius * radius;
  };
  switch (kind) {
    case TargetKind::two_bands:
      for (int r = height / 2; r < height; ++r)
        for (int c = 0; c < width; ++c) img.at(r, c) = 255;
      break;
    case TargetKind::three_bands: {
      const int third = height / 3;
      for (int r = 0; r < height; ++r) {
        const std::uint8_t level = r < third ? 0 : (r < height - third ? 128 : 255);
        for (int c = 0; c < width; ++c) img.at(r, c) = level;
      }
      break;
    }
    case TargetKind::disc: {
      const double radius = 0.35 * std::min(width, height);
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
          if (inside(r, c, cy, cx, radius)) img.at(r, c) = 255;
      break;
    }
    case TargetKind::half_discs: {
      const double radius = 0.4 * width;
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
          if (inside(r, c, 0.0, cx, radius)) img.at(r, c) = 128;
          if (inside(r, c, height - 1.0, cx, radius)) img.at(r, c) = 255;
        }
      break;
    }
  }
  return img;
}

double similarity(const GrayImage& a, const GrayImage& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw std::invalid_argument("similarity of images with different dimensions");
  double sum = 0.0;
  const auto& la = a.levels();
  const auto& lb = b.levels();
  for (std::size_t k = 0; k < la.size(); ++k) {
    const double d = la[k] / 255.0 - lb[k] / 255.0;
    sum += d * d;
  }
  return 1.0 - sum / static_cast<double>(la.size());
}

neat::IoShape ModelVariant::io() const {
  if (family == Family::regression) return {2, 1};
  return {4 * chemicals, chemicals + 1};
}

std::string ModelVariant::name() const {
  if (family == Family::regression) return "regression";
  return std::to_string(chemicals) +
         (topology == neuro::Topology::feedforward ? "-ffwd" : "-recurr");
}

ModelVariant parse_variant(std::string_view name) {
  using neuro::Topology;
  if (name == "regression") return {Family::regression, 0, Topology::feedforward};
  if (name == "1-ffwd") return {Family::developmental, 1, Topology::feedforward};
  if (name == "1-recurr") return {Family::developmental, 1, Topology::recurrent};
  if (name == "2-ffwd") return {Family::developmental, 2, Topology::feedforward};
  if (name == "2-recurr") return {Family::developmental, 2, Topology::recurrent};
  throw std::invalid_argument("unknown model variant: " + std::string(name));
}

GrayImage regression_image(const neat::Genome& genome, int width, int height) {
  const auto io = genome.io();
  if (io.inputs != 2 || io.outputs != 1)
    throw std::invalid_argument("regression genome must map (x,y) to one output");
  neuro::Network net(neat::compile(genome));
  GrayImage img(width, height);
  std::array<double, 3> inputs{0.0, 0.0, 1.0};
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      inputs[0] = width > 1 ? static_cast<double>(c) / (width - 1) : 0.0;
      inputs[1] = height > 1 ? static_cast<double>(r) / (height - 1) : 0.0;
      net.reset();
      net.forward_pass(inputs);
      img.at(r, c) = discretize(net.output(0));
    }
  }
  return img;
}

Evaluation evaluate(const neat::Genome& genome, const ModelVariant& variant,
                    const GrayImage& target, const devo::GrowthConfig& growth) {
  const auto expected = variant.io();
  const auto actual = genome.io();
  if (expected.inputs != actual.inputs || expected.outputs != actual.outputs)
    throw std::invalid_argument("genome arity does not match variant " + variant.name());

  if (variant.family == Family::regression) {
    const auto img = regression_image(genome, target.width(), target.height());
    return {similarity(img, target), true, 0};
  }
  devo::Organism org(genome, target.width(), target.height(), variant.chemicals);
  auto result = devo::grow(std::move(org), growth);
  if (!result.converged) return {0.0, false, result.iterations_used};
  return {similarity(*result.phenotype, target), true, result.iterations_used};
}

}  // namespace celldev::flags
