"use strict";
/**
 * Minimal LSP client over a child process on stdio.
 *
 * Deliberately thin: it moves documents and requests between the editor and
 * the server and keeps no analysis logic of its own. If the server dies
 * unexpectedly it is restarted once (re-opening known documents); a second
 * death is reported through onUnavailable.
 */
Object.defineProperty(exports, "__esModule", { value: true });
exports.LspClient = exports.LspResponseError = void 0;
const child_process_1 = require("child_process");
const protocol_1 = require("./protocol");
class LspResponseError extends Error {
    constructor(code, message, data) {
        super(message);
        this.code = code;
        this.data = data;
    }
}
exports.LspResponseError = LspResponseError;
class LspClient {
    constructor(options) {
        this.options = options;
        this.child = null;
        this.nextId = 1;
        this.pending = new Map();
        this.notificationHandlers = new Map();
        this.openDocuments = new Map();
        this.restartsLeft = 1;
        this.stopped = false;
        this.onUnavailable = null;
    }
    get processId() {
        return this.child?.pid;
    }
    async start() {
        await this.spawnAndInitialize();
    }
    spawnAndInitialize() {
        return new Promise((resolve, reject) => {
            const child = (0, child_process_1.spawn)(this.options.command, this.options.args, {
                stdio: ["pipe", "pipe", "pipe"],
            });
            let settled = false;
            child.on("error", (error) => {
                if (!settled) {
                    settled = true;
                    reject(new Error(`failed to start ${this.options.command}: ${error.message}`));
                }
            });
            const reader = new protocol_1.MessageReader((message) => this.dispatch(message));
            child.stdout.on("data", (chunk) => reader.feed(chunk));
            child.on("exit", (code) => this.handleExit(code));
            this.child = child;
            this.request("initialize", {
                processId: process.pid,
                rootUri: null,
                capabilities: {},
                initializationOptions: this.options.initializationOptions ?? {},
            })
                .then(() => {
                this.notify("initialized", {});
                if (!settled) {
                    settled = true;
                    resolve();
                }
            })
                .catch((error) => {
                if (!settled) {
                    settled = true;
                    reject(error);
                }
            });
        });
    }
    handleExit(code) {
        const reason = `server exited with code ${code ?? "unknown"}`;
        for (const [, pending] of this.pending) {
            pending.reject(new Error(reason));
        }
        this.pending.clear();
        this.child = null;
        if (this.stopped) {
            return;
        }
        if (this.restartsLeft > 0) {
            this.restartsLeft -= 1;
            this.spawnAndInitialize()
                .then(() => {
                for (const [uri, doc] of this.openDocuments) {
                    this.notify("textDocument/didOpen", {
                        textDocument: {
                            uri,
                            languageId: doc.languageId,
                            version: doc.version,
                            text: doc.text,
                        },
                    });
                }
            })
                .catch((error) => {
                this.onUnavailable?.(`restart failed: ${error.message}`);
            });
        }
        else {
            this.onUnavailable?.(reason);
        }
    }
    dispatch(message) {
        if (message.id !== undefined && (message.result !== undefined || message.error !== undefined)) {
            const pending = this.pending.get(message.id);
            if (pending) {
                this.pending.delete(message.id);
                if (message.error) {
                    pending.reject(new LspResponseError(message.error.code, message.error.message, message.error.data));
                }
                else {
                    pending.resolve(message.result);
                }
            }
            return;
        }
        if (message.method) {
            const handler = this.notificationHandlers.get(message.method);
            if (handler) {
                handler(message.params);
            }
        }
    }
    onNotification(method, handler) {
        this.notificationHandlers.set(method, handler);
    }
    request(method, params) {
        const child = this.child;
        if (!child || !child.stdin) {
            return Promise.reject(new Error("language server is not running"));
        }
        const id = this.nextId++;
        const promise = new Promise((resolve, reject) => {
            this.pending.set(id, { resolve, reject });
        });
        child.stdin.write((0, protocol_1.frameMessage)({ jsonrpc: "2.0", id, method, params }));
        return promise;
    }
    notify(method, params) {
        this.child?.stdin?.write((0, protocol_1.frameMessage)({ jsonrpc: "2.0", method, params }));
    }
    openDocument(uri, languageId, version, text) {
        this.openDocuments.set(uri, { languageId, version, text });
        this.notify("textDocument/didOpen", {
            textDocument: { uri, languageId, version, text },
        });
    }
    changeDocument(uri, version, text) {
        const doc = this.openDocuments.get(uri);
        if (doc) {
            doc.version = version;
            doc.text = text;
        }
        this.notify("textDocument/didChange", {
            textDocument: { uri, version },
            contentChanges: [{ text }],
        });
    }
    closeDocument(uri) {
        this.openDocuments.delete(uri);
        this.notify("textDocument/didClose", { textDocument: { uri } });
    }
    async stop() {
        this.stopped = true;
        const child = this.child;
        if (!child) {
            return;
        }
        try {
            await this.request("shutdown", {});
            this.notify("exit", {});
        }
        catch {
            // fall through to kill
        }
        setTimeout(() => {
            if (child.exitCode === null) {
                child.kill();
            }
        }, 500);
    }
}
exports.LspClient = LspClient;
//# sourceMappingURL=lspClient.js.map