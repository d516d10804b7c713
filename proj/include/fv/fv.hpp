#pragma once

#include "fv/components.hpp"
#include "fv/config.hpp"
#include "fv/cover.hpp"
#include "fv/csv.hpp"
#include "fv/dbscan.hpp"
#include "fv/detect.hpp"
#include "fv/features.hpp"
#include "fv/flow.hpp"
#include "fv/graph.hpp"
#include "fv/graph_json.hpp"
#include "fv/kdtree.hpp"
#include "fv/kmeans.hpp"
#include "fv/matrix.hpp"
#include "fv/net.hpp"
#include "fv/pcap.hpp"
#include "fv/pipeline.hpp"
#include "fv/precluster.hpp"
#include "fv/recording.hpp"
#include "fv/rng.hpp"
#include "fv/synth.hpp"
