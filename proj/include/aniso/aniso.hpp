#pragma once

#include "aniso/closed_form.hpp"
#include "aniso/fem.hpp"
#include "aniso/functional.hpp"
#include "aniso/geometry.hpp"
#include "aniso/io.hpp"
#include "aniso/mesh.hpp"
#include "aniso/seminorm.hpp"
#include "aniso/slicing.hpp"
#include "aniso/solve.hpp"
#include "aniso/special_functions.hpp"
