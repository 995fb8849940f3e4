#pragma once
// Umbrella header: the whole toolkit.

#include "splitlink/common.hpp"
#include "splitlink/core.hpp"
#include "splitlink/csv.hpp"
#include "splitlink/datagen.hpp"
#include "splitlink/distance.hpp"
#include "splitlink/eval.hpp"
#include "splitlink/linkage.hpp"
#include "splitlink/namegen.hpp"
#include "splitlink/protocol.hpp"
#include "splitlink/smashing.hpp"
#include "splitlink/svm.hpp"
