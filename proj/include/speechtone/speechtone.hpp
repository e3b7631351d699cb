#pragma once

// Speech-based data sonification compiler: spec parsing and validation,
// data transforms, scale resolution, schedule compilation and emitters.

#include "speechtone/compiler.hpp"
#include "speechtone/data_value.hpp"
#include "speechtone/dataset.hpp"
#include "speechtone/diagnostic.hpp"
#include "speechtone/emitters.hpp"
#include "speechtone/scales.hpp"
#include "speechtone/spec_model.hpp"
