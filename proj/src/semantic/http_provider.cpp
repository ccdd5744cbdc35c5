#include <openssl/evp.h>

#include <httplib.h>
#include <json.hpp>

#include "signmotion/common/error.hpp"
#include "signmotion/common/io.hpp"
#include "signmotion/semantic/embedding.hpp"

namespace signmotion {

namespace {

std::string base64(const std::string& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

}  // namespace

HttpProvider::HttpProvider(std::string base_url, int dimension)
    : base_url_(std::move(base_url)), dimension_(dimension) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::string HttpProvider::id() const { return "http:" + base_url_ + ":d=" + std::to_string(dimension_); }

std::vector<float> HttpProvider::embed(Modality modality, const std::string& key) {
    nlohmann::json request = {{"modality", to_string(modality)}, {"input", key}};
    if (modality == Modality::image) {
        std::string bytes;
        try {
            bytes = read_file(key);
        } catch (const Error&) {
            fail(ErrorCode::input, "embed_image: cannot read image '" + key + "'");
        }
        request["data_base64"] = base64(bytes);
    }
    httplib::Client client(base_url_);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    const auto res = client.Post("/embed", request.dump(), "application/json");
    if (!res) fail(ErrorCode::transport, "embedding provider unreachable at " + base_url_ + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
        fail(ErrorCode::transport, "embedding provider returned HTTP " + std::to_string(res->status));
    try {
        const auto body = nlohmann::json::parse(res->body);
        return body.at("embedding").get<std::vector<float>>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::transport, std::string("malformed embedding response: ") + e.what());
    }
}

}  // namespace signmotion
