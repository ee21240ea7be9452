#include "a2lc/proxy.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace a2lc {

ProxyModel make_proxy(int input_dim, int num_classes, const ProxyHyper& hyper) {
  if (hyper.hidden_dim < 1) throw std::invalid_argument("proxy: hidden_dim must be positive");
  ProxyModel model;
  model.net = Mlp<double>({input_dim, hyper.hidden_dim, num_classes}, hyper.activation, hyper.seed);
  model.feature_source = hyper.feature_source;
  return model;
}

ProxyModel train_proxy(const DatasetState& ds, const ProxyHyper& hyper, const ProxyModel* init) {
  if (ds.pixels.empty()) throw std::invalid_argument("train_proxy: empty dataset");
  const int d = static_cast<int>(ds.pixels.front().feature.size());

  ProxyModel model = init ? *init : make_proxy(d, ds.num_classes, hyper);

  Mat x(d, static_cast<Eigen::Index>(ds.pixels.size()));
  std::vector<int> y(ds.pixels.size());
  for (std::size_t i = 0; i < ds.pixels.size(); ++i) {
    x.col(static_cast<Eigen::Index>(i)) = ds.pixels[i].feature;
    y[i] = ds.masks[static_cast<std::size_t>(ds.pixels[i].mask_id)].pseudo_label;
  }
  const Vec w = Vec::Ones(static_cast<Eigen::Index>(ds.pixels.size()));

  SgdOptions opt;
  opt.epochs = hyper.epochs;
  opt.learning_rate = hyper.learning_rate;
  opt.batch_size = hyper.batch_size;
  opt.seed = hyper.seed;
  sgd_train(model.net, x, y, w, opt);
  model.trained_on_round = ds.round;
  return model;
}

Vec pixel_probs(const ProxyModel& model, const PixelSample& pixel) {
  return model.net.probs(pixel.feature);
}

Vec pixel_feature(const ProxyModel& model, const PixelSample& pixel) {
  if (model.feature_source == FeatureSource::kInput) {
    if (pixel.feature.size() != model.net.input_dim())
      throw std::invalid_argument("pixel_feature: input dimension mismatch");
    return pixel.feature;
  }
  return model.net.last_hidden(pixel.feature);
}

Vec mask_feature(const ProxyModel& model, const Mask& mask, const DatasetState& ds) {
  if (mask.pixel_ids.empty()) throw std::invalid_argument("mask_feature: empty mask");
  // accumulate in pixel-id order so the mean is invariant to storage order
  std::vector<PixelId> ids(mask.pixel_ids);
  std::sort(ids.begin(), ids.end());
  Vec sum = Vec::Zero(model.feature_dim());
  for (PixelId pid : ids) sum += pixel_feature(model, ds.pixels[static_cast<std::size_t>(pid)]);
  return sum / static_cast<double>(mask.pixel_ids.size());
}

ClassId dominant_label(const ProxyModel& model, const Mask& mask, const DatasetState& ds) {
  if (mask.pixel_ids.empty()) throw std::invalid_argument("dominant_label: empty mask");
  VecI counts = VecI::Zero(model.num_classes());
  for (PixelId pid : mask.pixel_ids) {
    Eigen::Index pred;
    pixel_probs(model, ds.pixels[static_cast<std::size_t>(pid)]).maxCoeff(&pred);
    ++counts(pred);
  }
  Eigen::Index arg;
  counts.maxCoeff(&arg);  // first max: lowest class id wins ties
  return static_cast<ClassId>(arg);
}

void save_proxy(std::ostream& os, const ProxyModel& model) {
  os << "a2lc-proxy 1\n";
  os << "feature_source " << (model.feature_source == FeatureSource::kHidden ? "hidden" : "input")
     << "\n";
  os << "trained_on_round " << model.trained_on_round << "\n";
  save_mlp(os, model.net);
}

ProxyModel load_proxy(std::istream& is) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "a2lc-proxy" || version != 1)
    throw std::runtime_error("load_proxy: bad header '" + magic + "'");
  std::string key, value;
  ProxyModel model;
  is >> key >> value;
  if (key != "feature_source") throw std::runtime_error("load_proxy: expected feature_source");
  if (value == "hidden")
    model.feature_source = FeatureSource::kHidden;
  else if (value == "input")
    model.feature_source = FeatureSource::kInput;
  else
    throw std::runtime_error("load_proxy: unknown feature_source '" + value + "'");
  is >> key >> model.trained_on_round;
  if (key != "trained_on_round") throw std::runtime_error("load_proxy: expected trained_on_round");
  model.net = load_mlp<double>(is);
  return model;
}

}  // namespace a2lc
