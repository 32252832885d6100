#pragma once

#include "reparam/atlas.hpp"
#include "reparam/brep.hpp"
#include "reparam/core.hpp"
#include "reparam/features.hpp"
#include "reparam/io.hpp"
#include "reparam/locator.hpp"
#include "reparam/mesh.hpp"
#include "reparam/parallel.hpp"
#include "reparam/param.hpp"
#include "reparam/patch.hpp"
#include "reparam/pipeline.hpp"
#include "reparam/planar.hpp"
#include "reparam/quality.hpp"
#include "reparam/refine.hpp"
#include "reparam/remesh.hpp"
#include "reparam/scheme.hpp"
#include "reparam/verify.hpp"
