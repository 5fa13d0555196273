#pragma once

#include "kdqlab/error.hpp"
#include "kdqlab/qmath.hpp"
#include "kdqlab/protocol.hpp"
#include "kdqlab/kdq.hpp"
#include "kdqlab/trace.hpp"
#include "kdqlab/interferometer.hpp"
#include "kdqlab/nvmodel.hpp"
#include "kdqlab/recon.hpp"
#include "kdqlab/io.hpp"
#include "kdqlab/config.hpp"
