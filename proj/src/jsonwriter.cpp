#include "ksymp/jsonwriter.hpp"

#include <cmath>
#include <cstdio>

namespace ksymp {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out;
}

void JsonWriter::comma() {
    if (pending_key_) {
        pending_key_ = false;
        return;
    }
    if (!first_.empty()) {
        if (!first_.back())
            out_ += ',';
        first_.back() = false;
    }
}

JsonWriter& JsonWriter::begin_object() {
    comma();
    out_ += '{';
    first_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    out_ += '}';
    first_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    comma();
    out_ += '[';
    first_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    out_ += ']';
    first_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::key(const std::string& name) {
    comma();
    out_ += '"';
    out_ += json_escape(name);
    out_ += "\":";
    pending_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(double x) {
    comma();
    if (!std::isfinite(x)) {
        out_ += "null";
        return *this;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out_ += buf;
    return *this;
}

JsonWriter& JsonWriter::value(int x) {
    comma();
    out_ += std::to_string(x);
    return *this;
}

JsonWriter& JsonWriter::value(unsigned long long x) {
    comma();
    out_ += std::to_string(x);
    return *this;
}

JsonWriter& JsonWriter::value(bool x) {
    comma();
    out_ += x ? "true" : "false";
    return *this;
}

JsonWriter& JsonWriter::value(const std::string& s) {
    comma();
    out_ += '"';
    out_ += json_escape(s);
    out_ += '"';
    return *this;
}

JsonWriter& JsonWriter::value(const char* s) { return value(std::string(s)); }

JsonWriter& JsonWriter::null() {
    comma();
    out_ += "null";
    return *this;
}

} // namespace ksymp
