#pragma once

#include "psdstein/error.hpp"
#include "psdstein/pmf.hpp"
#include "psdstein/psd.hpp"
#include "psdstein/sequence.hpp"
#include "psdstein/oracle.hpp"
#include "psdstein/bound.hpp"
#include "psdstein/runs.hpp"
