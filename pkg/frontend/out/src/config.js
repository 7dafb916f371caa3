"use strict";
var __createBinding = (this && this.__createBinding) || (Object.create ? (function(o, m, k, k2) {
    if (k2 === undefined) k2 = k;
    var desc = Object.getOwnPropertyDescriptor(m, k);
    if (!desc || ("get" in desc ? !m.__esModule : desc.writable || desc.configurable)) {
      desc = { enumerable: true, get: function() { return m[k]; } };
    }
    Object.defineProperty(o, k2, desc);
}) : (function(o, m, k, k2) {
    if (k2 === undefined) k2 = k;
    o[k2] = m[k];
}));
var __setModuleDefault = (this && this.__setModuleDefault) || (Object.create ? (function(o, v) {
    Object.defineProperty(o, "default", { enumerable: true, value: v });
}) : function(o, v) {
    o["default"] = v;
});
var __importStar = (this && this.__importStar) || (function () {
    var ownKeys = function(o) {
        ownKeys = Object.getOwnPropertyNames || function (o) {
            var ar = [];
            for (var k in o) if (Object.prototype.hasOwnProperty.call(o, k)) ar[ar.length] = k;
            return ar;
        };
        return ownKeys(o);
    };
    return function (mod) {
        if (mod && mod.__esModule) return mod;
        var result = {};
        if (mod != null) for (var k = ownKeys(mod), i = 0; i < k.length; i++) if (k[i] !== "default") __createBinding(result, mod, k[i]);
        __setModuleDefault(result, mod);
        return result;
    };
})();
Object.defineProperty(exports, "__esModule", { value: true });
exports.resolveConfig = resolveConfig;
exports.findServer = findServer;
const fs = __importStar(require("fs"));
const path = __importStar(require("path"));
const vscode = __importStar(require("vscode"));
function resolveConfig() {
    const section = vscode.workspace.getConfiguration("a11yForge");
    return {
        serverPath: section.get("serverPath", "a11y-forge-lsp"),
        serverArgs: section.get("serverArgs", []),
        configPath: section.get("configPath", ""),
        trace: section.get("trace", "off"),
    };
}
/** Resolve the server executable; null when it cannot be found. */
function findServer(serverPath) {
    if (serverPath.includes(path.sep) || serverPath.includes("/")) {
        return fs.existsSync(serverPath) ? serverPath : null;
    }
    const dirs = (process.env.PATH ?? "").split(path.delimiter);
    for (const dir of dirs) {
        const candidate = path.join(dir, serverPath);
        if (fs.existsSync(candidate)) {
            return candidate;
        }
    }
    return null;
}
//# sourceMappingURL=config.js.map