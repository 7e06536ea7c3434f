#ifndef TRANSLAB_TRANSLAB_HPP
#define TRANSLAB_TRANSLAB_HPP

#include "translab/analysis.hpp"
#include "translab/characteristics.hpp"
#include "translab/config.hpp"
#include "translab/error.hpp"
#include "translab/fields.hpp"
#include "translab/geometry.hpp"
#include "translab/io.hpp"
#include "translab/norms.hpp"
#include "translab/studies.hpp"
#include "translab/weakform.hpp"

#endif  // TRANSLAB_TRANSLAB_HPP
