#pragma once

#include "netanom/boost.hpp"
#include "netanom/detector.hpp"
#include "netanom/errors.hpp"
#include "netanom/frame.hpp"
#include "netanom/mlp.hpp"
#include "netanom/rng.hpp"
#include "netanom/significance.hpp"
#include "netanom/simgen.hpp"
