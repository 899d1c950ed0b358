#ifndef HLIFT_HLIFT_HPP
#define HLIFT_HLIFT_HPP

#include "hlift/connections.hpp"
#include "hlift/geometry.hpp"
#include "hlift/integrator.hpp"
#include "hlift/io.hpp"
#include "hlift/lifting.hpp"
#include "hlift/uvb.hpp"

#endif // HLIFT_HLIFT_HPP
