#include "testutil.hpp"
