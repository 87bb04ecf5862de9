#pragma once

#include "corec.hpp"
#include "diag.hpp"
#include "difftest.hpp"
#include "emit.hpp"
#include "icaml.hpp"
#include "semantics.hpp"
#include "surface.hpp"
#include "testgen.hpp"
#include "translate.hpp"
