#ifndef XREG_XREG_HPP_
#define XREG_XREG_HPP_

#include "xreg/affinity.hpp"
#include "xreg/assignment.hpp"
#include "xreg/benchmark.hpp"
#include "xreg/cloud_io.hpp"
#include "xreg/edge_descriptor.hpp"
#include "xreg/esf.hpp"
#include "xreg/export.hpp"
#include "xreg/geometry.hpp"
#include "xreg/graph_matching.hpp"
#include "xreg/metrics.hpp"
#include "xreg/preprocess.hpp"
#include "xreg/registration.hpp"
#include "xreg/spatial_index.hpp"
#include "xreg/structure.hpp"
#include "xreg/supervoxel.hpp"
#include "xreg/synthetic.hpp"
#include "xreg/transform_estimation.hpp"

#endif  // XREG_XREG_HPP_
