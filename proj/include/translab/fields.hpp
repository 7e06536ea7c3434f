#ifndef TRANSLAB_FIELDS_HPP
#define TRANSLAB_FIELDS_HPP

#include "translab/fields/beta.hpp"
#include "translab/fields/kernel.hpp"
#include "translab/fields/scalar_field.hpp"
#include "translab/fields/test_function.hpp"
#include "translab/fields/velocity.hpp"

#endif  // TRANSLAB_FIELDS_HPP
