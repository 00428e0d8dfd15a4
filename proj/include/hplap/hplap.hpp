#ifndef HPLAP_HPLAP_HPP_
#define HPLAP_HPLAP_HPP_

#include "hplap/benchmark.hpp"
#include "hplap/config.hpp"
#include "hplap/csv.hpp"
#include "hplap/error.hpp"
#include "hplap/experiment.hpp"
#include "hplap/feature_table.hpp"
#include "hplap/graph.hpp"
#include "hplap/kernel.hpp"
#include "hplap/metrics.hpp"
#include "hplap/model_io.hpp"
#include "hplap/pipeline.hpp"
#include "hplap/plap_eigen.hpp"
#include "hplap/splits.hpp"
#include "hplap/ssl_model.hpp"
#include "hplap/synthetic.hpp"

#endif  // HPLAP_HPLAP_HPP_
