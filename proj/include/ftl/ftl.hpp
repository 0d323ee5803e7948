#ifndef FTL_FTL_HPP
#define FTL_FTL_HPP

#include "ftl/atomize.hpp"
#include "ftl/config.hpp"
#include "ftl/density.hpp"
#include "ftl/errors.hpp"
#include "ftl/harness.hpp"
#include "ftl/io.hpp"
#include "ftl/metrics.hpp"
#include "ftl/model.hpp"
#include "ftl/reference.hpp"
#include "ftl/scheme.hpp"

#endif
