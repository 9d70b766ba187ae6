#pragma once

#include "gblab/core/errors.hpp"
#include "gblab/core/fft.hpp"
#include "gblab/core/grid.hpp"
#include "gblab/core/numerics.hpp"
#include "gblab/core/types.hpp"

#include "gblab/geometry/domain.hpp"
#include "gblab/geometry/fermi.hpp"
#include "gblab/geometry/flow.hpp"
#include "gblab/geometry/metric.hpp"
#include "gblab/geometry/registry.hpp"

#include "gblab/coefficients/field.hpp"
#include "gblab/coefficients/regularity.hpp"

#include "gblab/beams/beam.hpp"
#include "gblab/beams/cutoff.hpp"
#include "gblab/beams/hessian.hpp"

#include "gblab/superposition/family.hpp"
#include "gblab/superposition/normal.hpp"
#include "gblab/superposition/stationary.hpp"

#include "gblab/xray/image.hpp"
#include "gblab/xray/manifold.hpp"
#include "gblab/xray/riesz.hpp"
#include "gblab/xray/transform.hpp"

#include "gblab/wave/ansatz.hpp"
#include "gblab/wave/observability.hpp"
#include "gblab/wave/solver.hpp"

#include "gblab/cli/config.hpp"
#include "gblab/cli/run.hpp"
#include "gblab/cli/svg.hpp"
