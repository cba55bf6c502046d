#pragma once

#include <memory>

#include "archevo/metrics.hpp"
#include "archevo/model.hpp"
#include "archevo/preferences.hpp"

namespace archevo {

/// Everything an evaluation needs that stays fixed for a run: the model, ERP
/// weights, the component-count bounds and the derived normalization constants.
class Problem {
 public:
  Problem(std::shared_ptr<const AnalysisModel> model, ErpWeights erp, ComponentBounds bounds)
      : model_(std::move(model)),
        erp_(erp),
        bounds_(bounds),
        norm_(NormalizationBounds::for_model(*model_, erp_, bounds_.n_min)) {}

  const AnalysisModel& model() const noexcept { return *model_; }
  const std::shared_ptr<const AnalysisModel>& shared_model() const noexcept { return model_; }
  const ErpWeights& erp() const noexcept { return erp_; }
  ComponentBounds bounds() const noexcept { return bounds_; }
  const NormalizationBounds& normalization() const noexcept { return norm_; }

 private:
  std::shared_ptr<const AnalysisModel> model_;
  ErpWeights erp_;
  ComponentBounds bounds_;
  NormalizationBounds norm_;
};

}  // namespace archevo
