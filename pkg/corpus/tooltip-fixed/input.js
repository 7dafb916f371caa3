import React, { useState } from 'react';

function Tooltip({ text, children }) {
  const [visible, setVisible] = useState(false);

  const showTooltip = () => setVisible(!visible);

  return (
    <div className="tooltip-wrapper">
      <button
        type="button"
        className="tooltip-trigger"
        onClick={showTooltip}
        aria-describedby="tooltip-text"
      >
        {children}
      </button>
      {visible && (
        <span id="tooltip-text" role="tooltip" className="tooltip-text">
          {text}
        </span>
      )}
    </div>
  );
}

export default Tooltip;
