#pragma once

#include "aq/box.hpp"
#include "aq/conic.hpp"
#include "aq/functional.hpp"
#include "aq/io.hpp"
#include "aq/membership.hpp"
#include "aq/moment.hpp"
#include "aq/principles.hpp"
#include "aq/quantum.hpp"
#include "aq/scenario.hpp"
#include "aq/version.hpp"
#include "aq/wirings.hpp"
