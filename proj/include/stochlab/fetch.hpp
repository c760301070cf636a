#pragma once

#include <string>

namespace stochlab {

// GET the URL (http or https) and return the response body. Redirects are
// followed; anything but a 200 throws InvalidInput.
std::string http_get(const std::string& url);

} // namespace stochlab
