#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "umni/linalg.hpp"
#include "umni/recovery.hpp"
#include "umni/scm.hpp"

namespace umni {

/// A complete reproducibility dump: latent model, environments, transform.
struct ModelBundle {
  LinearGaussianSem sem;
  std::vector<EnvironmentSpec> environments;
  ObservationModel model;
};

std::string model_to_json(const ModelBundle& bundle);
ModelBundle model_from_json(const std::string& text);

/// Comma-separated rows, full round-trip precision.
void write_matrix_csv(std::ostream& os, const MatrixXd& m);
MatrixXd read_matrix_csv(std::istream& is);

std::string trace_to_json(const RecoveryState& state);

}  // namespace umni
