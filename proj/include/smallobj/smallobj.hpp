#pragma once

#include "smallobj/anchors.hpp"
#include "smallobj/augment.hpp"
#include "smallobj/coco.hpp"
#include "smallobj/errors.hpp"
#include "smallobj/image.hpp"
#include "smallobj/image_io.hpp"
#include "smallobj/mask.hpp"
#include "smallobj/parallel.hpp"
#include "smallobj/pipeline.hpp"
#include "smallobj/rng.hpp"
