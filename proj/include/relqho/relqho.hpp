#pragma once

#include "relqho/constants.hpp"
#include "relqho/params.hpp"
#include "relqho/quad.hpp"
#include "relqho/coeffs.hpp"
#include "relqho/gaussian.hpp"
#include "relqho/dynamics.hpp"
#include "relqho/fock.hpp"
#include "relqho/report.hpp"
