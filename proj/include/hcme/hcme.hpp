#pragma once

#include "hcme/captcha.hpp"
#include "hcme/chaos.hpp"
#include "hcme/dicom.hpp"
#include "hcme/diffusion.hpp"
#include "hcme/envelope.hpp"
#include "hcme/errors.hpp"
#include "hcme/image.hpp"
#include "hcme/key_schedule.hpp"
#include "hcme/metrics.hpp"
#include "hcme/pgm.hpp"
#include "hcme/pipeline.hpp"
#include "hcme/volume.hpp"
