#pragma once

#define TANGO_VERSION_STRING "1.0.0"
