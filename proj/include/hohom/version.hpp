#pragma once

#define HOHOM_VERSION "0.1.0"
