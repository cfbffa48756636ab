#pragma once

#include "torsionlab/error.hpp"
#include "torsionlab/geometry.hpp"
#include "torsionlab/linking.hpp"
#include "torsionlab/measures.hpp"
#include "torsionlab/parallel.hpp"
#include "torsionlab/systems.hpp"
#include "torsionlab/theorems.hpp"
#include "torsionlab/torsion.hpp"
