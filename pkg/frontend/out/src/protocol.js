"use strict";
/**
 * Content-Length framing for LSP JSON-RPC messages over byte streams.
 */
Object.defineProperty(exports, "__esModule", { value: true });
exports.MessageReader = void 0;
exports.frameMessage = frameMessage;
function frameMessage(payload) {
    const body = Buffer.from(JSON.stringify(payload), "utf8");
    const header = Buffer.from(`Content-Length: ${body.length}\r\n\r\n`, "ascii");
    return Buffer.concat([header, body]);
}
class MessageReader {
    constructor(onMessage) {
        this.onMessage = onMessage;
        this.buffer = Buffer.alloc(0);
    }
    feed(chunk) {
        this.buffer = Buffer.concat([this.buffer, chunk]);
        for (;;) {
            const headerEnd = this.buffer.indexOf("\r\n\r\n");
            if (headerEnd === -1) {
                return;
            }
            const header = this.buffer.subarray(0, headerEnd).toString("ascii");
            const match = /content-length:\s*(\d+)/i.exec(header);
            if (!match) {
                this.buffer = this.buffer.subarray(headerEnd + 4);
                continue;
            }
            const length = parseInt(match[1], 10);
            const bodyStart = headerEnd + 4;
            if (this.buffer.length < bodyStart + length) {
                return;
            }
            const body = this.buffer.subarray(bodyStart, bodyStart + length).toString("utf8");
            this.buffer = this.buffer.subarray(bodyStart + length);
            let message;
            try {
                message = JSON.parse(body);
            }
            catch {
                continue; // skip malformed frames; the stream stays aligned
            }
            this.onMessage(message);
        }
    }
}
exports.MessageReader = MessageReader;
//# sourceMappingURL=protocol.js.map