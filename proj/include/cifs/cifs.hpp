#pragma once

#include "cifs/ba.hpp"
#include "cifs/config.hpp"
#include "cifs/conformal_map.hpp"
#include "cifs/diffuse.hpp"
#include "cifs/gdms.hpp"
#include "cifs/geometry.hpp"
#include "cifs/irreducibility.hpp"
#include "cifs/julia.hpp"
#include "cifs/measure.hpp"
#include "cifs/numeric.hpp"
#include "cifs/parallel.hpp"
#include "cifs/pressure.hpp"
#include "cifs/strip.hpp"
#include "cifs/symbolic.hpp"
